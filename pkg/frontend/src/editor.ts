/** Canvas rendering and pointer wiring around the EditorCore.
 *
 * The landmark canvas is 512x512, an 8x display of the 64px synthesis grid;
 * the result panel shows the true 64x64 output upscaled with nearest
 * neighbor so the synthesis resolution stays honest.
 */

import { EditorCore } from "./state.js";
import { GROUPS, Point } from "./types.js";

export const CANVAS_SIZE = 512;
const HIT_RADIUS_PX = 9;

const GROUP_COLORS: Record<string, string> = {
  jaw: "#7fb069",
  brows: "#d4a03c",
  nose: "#c96468",
  eyes: "#4f9dd0",
  mouth: "#b06ab0",
};

function groupOf(index: number): string {
  for (const [name, lo, hi] of GROUPS) {
    if (index >= lo && index < hi) return name;
  }
  return "jaw";
}

export class EditorView {
  private dragging = false;

  constructor(
    private readonly core: EditorCore,
    private readonly canvas: HTMLCanvasElement,
    private readonly faceImg: HTMLImageElement,
    private readonly heatmapImg: HTMLImageElement,
    private readonly genderFill: HTMLElement,
    private readonly genderLabel: HTMLElement,
    private readonly statusLine: HTMLElement,
  ) {
    canvas.width = CANVAS_SIZE;
    canvas.height = CANVAS_SIZE;
    core.onChange = () => this.render();
    this.bindPointerEvents();
  }

  private toNormalized(event: PointerEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    const x = ((event.clientX - rect.left) / rect.width) * CANVAS_SIZE;
    const y = ((event.clientY - rect.top) / rect.height) * CANVAS_SIZE;
    return [x / CANVAS_SIZE, y / CANVAS_SIZE];
  }

  private hitTest(event: PointerEvent): number | null {
    const [nx, ny] = this.toNormalized(event);
    let best: number | null = null;
    let bestDist = (HIT_RADIUS_PX / CANVAS_SIZE) ** 2;
    this.core.points.forEach((p, i) => {
      const d = (p[0] - nx) ** 2 + (p[1] - ny) ** 2;
      if (d <= bestDist) {
        best = i;
        bestDist = d;
      }
    });
    return best;
  }

  private bindPointerEvents(): void {
    this.canvas.addEventListener("pointerdown", (event) => {
      const index = this.hitTest(event);
      if (index === null) return;
      this.dragging = true;
      this.canvas.setPointerCapture(event.pointerId);
      this.core.beginGesture(index);
    });
    this.canvas.addEventListener("pointermove", (event) => {
      if (!this.dragging) return;
      const [nx, ny] = this.toNormalized(event);
      this.core.moveGesture(nx, ny);
    });
    const finish = (event: PointerEvent) => {
      if (!this.dragging) return;
      this.dragging = false;
      this.canvas.releasePointerCapture(event.pointerId);
      this.core.endGesture();
    };
    this.canvas.addEventListener("pointerup", finish);
    this.canvas.addEventListener("pointercancel", finish);
  }

  render(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.fillStyle = "#191c22";
    ctx.fillRect(0, 0, CANVAS_SIZE, CANVAS_SIZE);

    ctx.strokeStyle = "#2c313d";
    ctx.lineWidth = 1;
    for (let g = 0; g <= 8; g++) {
      const v = (g / 8) * CANVAS_SIZE;
      ctx.beginPath();
      ctx.moveTo(v, 0);
      ctx.lineTo(v, CANVAS_SIZE);
      ctx.moveTo(0, v);
      ctx.lineTo(CANVAS_SIZE, v);
      ctx.stroke();
    }

    this.core.points.forEach((p, i) => {
      const x = p[0] * CANVAS_SIZE;
      const y = p[1] * CANVAS_SIZE;
      ctx.beginPath();
      ctx.arc(x, y, i === this.core.selected ? 6 : 4, 0, Math.PI * 2);
      ctx.fillStyle = GROUP_COLORS[groupOf(i)];
      ctx.fill();
      if (i === this.core.selected) {
        ctx.strokeStyle = "#ffffff";
        ctx.lineWidth = 2;
        ctx.stroke();
      }
    });

    const resp = this.core.lastResponse;
    if (resp) {
      this.faceImg.src = `data:image/png;base64,${resp.image}`;
      if (resp.heatmap) {
        this.heatmapImg.src = `data:image/png;base64,${resp.heatmap}`;
        this.heatmapImg.classList.remove("hidden");
      } else {
        this.heatmapImg.classList.add("hidden");
      }
      const pct = Math.round(resp.gender_score * 100);
      this.genderFill.style.width = `${pct}%`;
      this.genderLabel.textContent =
        `P(male) = ${resp.gender_score.toFixed(3)}  ·  ${resp.latency_ms.toFixed(0)} ms`;
    }
    this.statusLine.textContent = this.core.lastError
      ? `error: ${this.core.lastError}`
      : `template: ${this.core.templateName ?? "-"}  ·  undo depth: ${this.core.undoDepth}` +
        `  ·  requests: ${this.core.requestsIssued}`;
  }
}

export function downloadPair(core: EditorCore): void {
  const pair = core.exportPair();
  const stamp = new Date().toISOString().replace(/[:.]/g, "-");
  const jsonBlob = new Blob([pair.landmarksJson], { type: "application/json" });
  triggerDownload(URL.createObjectURL(jsonBlob), `landmarks-${stamp}.json`);
  if (pair.imageBase64) {
    triggerDownload(`data:image/png;base64,${pair.imageBase64}`, `face-${stamp}.png`);
  }
}

function triggerDownload(href: string, filename: string): void {
  const a = document.createElement("a");
  a.href = href;
  a.download = filename;
  document.body.appendChild(a);
  a.click();
  a.remove();
}
