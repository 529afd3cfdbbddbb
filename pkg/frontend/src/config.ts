// Per-species annotation recipe, mirroring the service's JSON schema.

export type Method = 'kmeans' | 'otsu';
export type Cleanup = 'close' | 'open' | 'none';
export type Polarity = 'dark' | 'bright';

export interface SpeciesConfigData {
  method: Method;
  k?: number;                       // kmeans: 2 | 3
  foreground?: 'darkest' | number[]; // kmeans: cluster choice
  polarity?: Polarity;              // otsu
  cleanup: Cleanup;
  kernel_diameter: number;          // odd, >= 1
  seed: number;
}

export function defaultConfig(): SpeciesConfigData {
  return {
    method: 'kmeans',
    k: 2,
    foreground: 'darkest',
    cleanup: 'close',
    kernel_diameter: 9,
    seed: 0,
  };
}

/** Returns a list of violations; empty when the config may be sent. */
export function validateConfig(cfg: SpeciesConfigData): string[] {
  const problems: string[] = [];
  if (cfg.method !== 'kmeans' && cfg.method !== 'otsu') {
    problems.push(`unknown method ${cfg.method}`);
  }
  if (cfg.method === 'kmeans') {
    if (cfg.k !== 2 && cfg.k !== 3) {
      problems.push(`k must be 2 or 3, got ${cfg.k}`);
    }
    if (Array.isArray(cfg.foreground)) {
      if (cfg.foreground.length === 0) {
        problems.push('foreground cluster set is empty');
      }
      const k = cfg.k ?? 2;
      for (const idx of cfg.foreground) {
        if (!Number.isInteger(idx) || idx < 0 || idx >= k) {
          problems.push(`cluster index ${idx} out of range for k=${k}`);
        }
      }
    }
  }
  if (cfg.method === 'otsu' && cfg.polarity !== 'dark' && cfg.polarity !== 'bright') {
    problems.push(`polarity must be dark or bright, got ${cfg.polarity}`);
  }
  if (!['close', 'open', 'none'].includes(cfg.cleanup)) {
    problems.push(`unknown cleanup ${cfg.cleanup}`);
  }
  const d = cfg.kernel_diameter;
  if (!Number.isInteger(d) || d < 1 || d % 2 === 0) {
    problems.push(`kernel diameter must be odd >= 1, got ${d}`);
  }
  if (!Number.isInteger(cfg.seed)) {
    problems.push('seed must be an integer');
  }
  return problems;
}

/** Snap a raw slider value to the nearest valid (odd) kernel diameter. */
export function snapKernel(value: number, min = 1, max = 31): number {
  let v = Math.round(value);
  if (v % 2 === 0) v += 1;
  return Math.min(max, Math.max(min, v));
}
