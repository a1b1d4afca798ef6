/** Fake clock + scripted transport for the state machine tests. */

import {
  Point,
  Scheduler,
  SynthesisRequest,
  SynthesisResponse,
  TemplateEntry,
  Transport,
} from "../src/types.js";

export class FakeClock implements Scheduler {
  now = 0;
  private nextHandle = 1;
  private pending = new Map<number, { at: number; fn: () => void }>();

  schedule(fn: () => void, ms: number): number {
    const handle = this.nextHandle++;
    this.pending.set(handle, { at: this.now + ms, fn });
    return handle;
  }

  cancel(handle: number): void {
    this.pending.delete(handle);
  }

  /** Advance time, firing timers in order. */
  async advance(ms: number): Promise<void> {
    const target = this.now + ms;
    for (;;) {
      const due = [...this.pending.entries()]
        .filter(([, t]) => t.at <= target)
        .sort((a, b) => a[1].at - b[1].at)[0];
      if (!due) break;
      this.pending.delete(due[0]);
      this.now = due[1].at;
      due[1].fn();
      await drainMicrotasks();
    }
    this.now = target;
  }

  get pendingCount(): number {
    return this.pending.size;
  }
}

export async function drainMicrotasks(): Promise<void> {
  for (let i = 0; i < 20; i++) {
    await Promise.resolve();
  }
}

export function gridTemplate(name = "frontal"): TemplateEntry {
  const points: Point[] = [];
  for (let i = 0; i < 68; i++) {
    points.push([(i % 10) * 0.1 + 0.05, Math.floor(i / 10) * 0.1 + 0.05]);
  }
  return { name, points };
}

export interface RecordedRequest {
  request: SynthesisRequest;
  resolve: (r: SynthesisResponse) => void;
  reject: (e: Error) => void;
}

export class ScriptedTransport implements Transport {
  requests: RecordedRequest[] = [];
  autoRespond = true;
  private counter = 0;

  constructor(private readonly templateList: TemplateEntry[] = [gridTemplate()]) {}

  templates(): Promise<TemplateEntry[]> {
    return Promise.resolve(this.templateList);
  }

  synthesize(request: SynthesisRequest): Promise<SynthesisResponse> {
    return new Promise((resolve, reject) => {
      const entry: RecordedRequest = { request, resolve, reject };
      this.requests.push(entry);
      if (this.autoRespond) {
        entry.resolve(this.makeResponse());
      }
    });
  }

  makeResponse(): SynthesisResponse {
    this.counter += 1;
    return {
      image: `png-${this.counter}`,
      gender_score: 0.5,
      latency_ms: 1.0,
    };
  }
}
