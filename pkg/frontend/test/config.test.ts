import { describe, expect, it } from 'vitest';

import { defaultConfig, snapKernel, validateConfig } from '../src/config.js';

describe('validateConfig', () => {
  it('accepts the default config', () => {
    expect(validateConfig(defaultConfig())).toEqual([]);
  });

  it('rejects even kernel diameters', () => {
    const cfg = { ...defaultConfig(), kernel_diameter: 8 };
    expect(validateConfig(cfg)).not.toEqual([]);
  });

  it('rejects k outside {2,3}', () => {
    expect(validateConfig({ ...defaultConfig(), k: 4 })).not.toEqual([]);
    expect(validateConfig({ ...defaultConfig(), k: 1 })).not.toEqual([]);
  });

  it('rejects empty or out-of-range cluster choices', () => {
    expect(validateConfig({ ...defaultConfig(), foreground: [] })).not.toEqual([]);
    expect(validateConfig({ ...defaultConfig(), k: 2, foreground: [2] })).not.toEqual([]);
    expect(validateConfig({ ...defaultConfig(), k: 3, foreground: [0, 2] })).toEqual([]);
  });

  it('validates otsu polarity', () => {
    const otsu = { ...defaultConfig(), method: 'otsu' as const, polarity: 'dark' as const };
    expect(validateConfig(otsu)).toEqual([]);
    expect(validateConfig({ ...otsu, polarity: 'inverted' as never })).not.toEqual([]);
  });
});

describe('snapKernel', () => {
  it('maps slider values onto odd diameters within range', () => {
    expect(snapKernel(8)).toBe(9);
    expect(snapKernel(9)).toBe(9);
    expect(snapKernel(0)).toBe(1);
    expect(snapKernel(40)).toBe(31);
  });
});
