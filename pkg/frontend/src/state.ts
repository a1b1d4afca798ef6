/** Editor state machine: landmark edits, undo, debounced synthesis.
 *
 * DOM-free so the contract is testable under node: the canvas layer feeds
 * normalized coordinates in and renders the state snapshots out.
 *
 * Invariants kept here:
 *  - the current set is always 68 points clamped to [0, 1] (payloads can
 *    never fail the server's range validation);
 *  - a burst of drags within the debounce window issues exactly one
 *    synthesize request;
 *  - at most one request is in flight; newer results win, stale ones drop;
 *  - undo restores the pre-drag points exactly, stack depth capped at 100.
 */

import {
  N_POINTS,
  Point,
  Scheduler,
  SynthesisResponse,
  TemplateEntry,
  Transport,
} from "./types.js";

export const DEBOUNCE_MS = 250;
export const MAX_UNDO = 100;

const clamp01 = (v: number) => (v < 0 ? 0 : v > 1 ? 1 : v);

function clonePoints(points: Point[]): Point[] {
  return points.map((p) => [p[0], p[1]] as Point);
}

export interface EditorOptions {
  debounceMs?: number;
  maxUndo?: number;
  sigmaPx?: number;
  returnHeatmap?: boolean;
}

export class EditorCore {
  points: Point[] = [];
  templateName: string | null = null;
  selected: number | null = null;
  lastResponse: SynthesisResponse | null = null;
  lastError: string | null = null;

  /** instrumentation for tests and the status line */
  requestsIssued = 0;
  responsesApplied = 0;
  responsesDropped = 0;

  onChange: (() => void) | null = null;

  private readonly undoStack: Point[][] = [];
  private readonly debounceMs: number;
  private readonly maxUndo: number;
  private sigmaPx: number | undefined;
  returnHeatmap: boolean;

  private timer: number | null = null;
  private inFlight = false;
  private queued = false;
  private sequence = 0;
  private gestureActive = false;
  private templateCache: TemplateEntry[] | null = null;

  constructor(
    private readonly transport: Transport,
    private readonly scheduler: Scheduler,
    options: EditorOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? DEBOUNCE_MS;
    this.maxUndo = options.maxUndo ?? MAX_UNDO;
    this.sigmaPx = options.sigmaPx;
    this.returnHeatmap = options.returnHeatmap ?? false;
  }

  get undoDepth(): number {
    return this.undoStack.length;
  }

  async listTemplates(): Promise<TemplateEntry[]> {
    if (!this.templateCache) {
      this.templateCache = await this.transport.templates();
    }
    return this.templateCache;
  }

  async loadTemplate(name: string): Promise<void> {
    const templates = await this.listTemplates();
    const entry = templates.find((t) => t.name === name);
    if (!entry) {
      throw new Error(`unknown template: ${name}`);
    }
    if (entry.points.length !== N_POINTS) {
      throw new Error(`template ${name} has ${entry.points.length} points`);
    }
    this.points = clonePoints(entry.points).map(
      (p) => [clamp01(p[0]), clamp01(p[1])] as Point,
    );
    this.templateName = name;
    this.selected = null;
    this.undoStack.length = 0;
    this.lastError = null;
    this.scheduleSynthesis();
    this.notify();
  }

  /** One-shot edit: snapshot for undo, clamp, update, debounce a request.
   *  A drag that does not move the point is a no-op (no undo entry, no
   *  network traffic). */
  dragPoint(index: number, x: number, y: number): void {
    this.assertIndex(index);
    const nx = clamp01(x);
    const ny = clamp01(y);
    const current = this.points[index];
    if (current[0] === nx && current[1] === ny) {
      return;
    }
    this.pushUndo();
    this.points[index] = [nx, ny];
    this.selected = index;
    this.scheduleSynthesis();
    this.notify();
  }

  /** Gesture variant for the canvas: one undo entry per pointer-down, any
   *  number of move updates, each debouncing the synthesize call. */
  beginGesture(index: number): void {
    this.assertIndex(index);
    this.selected = index;
    this.gestureActive = false; // undo snapshot is taken lazily on first move
    this.notify();
  }

  moveGesture(x: number, y: number): void {
    if (this.selected === null) return;
    const nx = clamp01(x);
    const ny = clamp01(y);
    const current = this.points[this.selected];
    if (current[0] === nx && current[1] === ny) return;
    if (!this.gestureActive) {
      this.pushUndo();
      this.gestureActive = true;
    }
    this.points[this.selected] = [nx, ny];
    this.scheduleSynthesis();
    this.notify();
  }

  endGesture(): void {
    this.gestureActive = false;
  }

  undo(): boolean {
    const prior = this.undoStack.pop();
    if (!prior) return false;
    this.points = prior;
    this.gestureActive = false;
    this.scheduleSynthesis();
    this.notify();
    return true;
  }

  /** Fire any pending debounced request immediately. */
  flush(): Promise<void> {
    if (this.timer !== null) {
      this.scheduler.cancel(this.timer);
      this.timer = null;
      return this.requestSynthesis();
    }
    return Promise.resolve();
  }

  /** Current landmark payload plus the last synthesized PNG, for download. */
  exportPair(): { landmarksJson: string; imageBase64: string | null } {
    return {
      landmarksJson: JSON.stringify({ schema: "ibug68", points: this.points }),
      imageBase64: this.lastResponse ? this.lastResponse.image : null,
    };
  }

  private assertIndex(index: number): void {
    if (!Number.isInteger(index) || index < 0 || index >= N_POINTS) {
      throw new Error(`point index out of range: ${index}`);
    }
  }

  private pushUndo(): void {
    this.undoStack.push(clonePoints(this.points));
    if (this.undoStack.length > this.maxUndo) {
      this.undoStack.shift();
    }
  }

  private scheduleSynthesis(): void {
    if (this.timer !== null) {
      this.scheduler.cancel(this.timer);
    }
    this.timer = this.scheduler.schedule(() => {
      this.timer = null;
      void this.requestSynthesis();
    }, this.debounceMs);
  }

  async requestSynthesis(): Promise<void> {
    if (this.inFlight) {
      this.queued = true; // newest-wins: re-issue with fresh points on completion
      return;
    }
    const token = ++this.sequence;
    this.inFlight = true;
    this.requestsIssued += 1;
    try {
      const response = await this.transport.synthesize({
        landmarks: clonePoints(this.points),
        sigma_px: this.sigmaPx,
        return_heatmap: this.returnHeatmap,
      });
      if (token === this.sequence) {
        this.lastResponse = response;
        this.lastError = null;
        this.responsesApplied += 1;
      } else {
        this.responsesDropped += 1;
      }
    } catch (err) {
      this.lastError = err instanceof Error ? err.message : String(err);
    } finally {
      this.inFlight = false;
      this.notify();
      if (this.queued) {
        this.queued = false;
        void this.requestSynthesis();
      }
    }
  }

  private notify(): void {
    if (this.onChange) this.onChange();
  }
}

export class TimeoutScheduler implements Scheduler {
  schedule(fn: () => void, ms: number): number {
    return setTimeout(fn, ms) as unknown as number;
  }

  cancel(handle: number): void {
    clearTimeout(handle as unknown as Parameters<typeof clearTimeout>[0]);
  }
}
