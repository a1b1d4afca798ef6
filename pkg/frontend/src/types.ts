/** Shared types mirroring the service's JSON API. */

export type Point = [number, number];

export interface TemplateEntry {
  name: string;
  points: Point[];
}

export interface SynthesisRequest {
  landmarks: Point[];
  sigma_px?: number;
  return_heatmap?: boolean;
}

export interface SynthesisResponse {
  image: string; // base64 PNG, 64x64
  gender_score: number;
  heatmap?: string;
  latency_ms: number;
}

export interface Transport {
  templates(): Promise<TemplateEntry[]>;
  synthesize(request: SynthesisRequest): Promise<SynthesisResponse>;
}

/** Injectable timer so the debounce logic is testable with a fake clock. */
export interface Scheduler {
  schedule(fn: () => void, ms: number): number;
  cancel(handle: number): void;
}

export const N_POINTS = 68;

/** Semantic groups of the 68-point convention (for marker coloring). */
export const GROUPS: Array<[string, number, number]> = [
  ["jaw", 0, 17],
  ["brows", 17, 27],
  ["nose", 27, 36],
  ["eyes", 36, 48],
  ["mouth", 48, 68],
];
