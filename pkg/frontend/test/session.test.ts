// Scripted review session against the real backend service: the UI's own
// client and store drive preview -> accept over a synthetic dataset, and
// the stored labels must be byte-identical to CLI batch output for the
// same configs. Also checks progress survives a service restart.

import { ChildProcess, execFileSync, spawn } from 'node:child_process';
import { mkdtempSync, readFileSync, readdirSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api.js';
import type { SpeciesConfigData } from '../src/config.js';
import { ReviewStore } from '../src/store.js';

const REPO_ROOT = join(__dirname, '..', '..');
const PYTHON = process.env.PYTHON ?? 'python3';
const PORT = 18420 + (process.pid % 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let work: string;
let server: ChildProcess | null = null;

function py(args: string[]): void {
  execFileSync(PYTHON, args, { cwd: REPO_ROOT, stdio: 'pipe' });
}

async function startServer(): Promise<void> {
  server = spawn(PYTHON, [
    '-m', 'bactoseg.cli', 'serve',
    '--root', join(work, 'dataset'),
    '--state', join(work, 'state.json'),
    '--labels-dir', join(work, 'ui_labels'),
    '--port', String(PORT),
  ], { cwd: REPO_ROOT, stdio: 'pipe' });
  for (let i = 0; i < 100; i++) {
    try {
      const resp = await fetch(`${BASE}/api/v1/progress`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error('service did not come up');
}

async function stopServer(): Promise<void> {
  if (server) {
    server.kill('SIGTERM');
    await new Promise((r) => setTimeout(r, 500));
    server = null;
  }
}

function readTree(dir: string): Map<string, Buffer> {
  const out = new Map<string, Buffer>();
  for (const entry of readdirSync(dir, { recursive: true, withFileTypes: true })) {
    if (entry.isFile()) {
      const rel = join(entry.parentPath ?? (entry as never)['path'], entry.name)
        .slice(dir.length + 1);
      out.set(rel, readFileSync(join(dir, rel)));
    }
  }
  return out;
}

beforeAll(async () => {
  work = mkdtempSync(join(tmpdir(), 'bactoseg-ui-'));
  py([join(REPO_ROOT, 'scripts', 'make_synthetic_dataset.py'),
      '--out', join(work, 'dataset'), '--species', '2', '--images', '3',
      '--size', '128', '--seed', '5']);
  py(['-m', 'bactoseg.cli', 'annotate', '--root', join(work, 'dataset'),
      '--config', join(work, 'configs.json'), '--out', join(work, 'cli_labels')]);
  await startServer();
}, 60000);

afterAll(async () => {
  await stopServer();
});

describe('scripted review session', () => {
  it('produces labels byte-identical to the CLI for the same configs', async () => {
    const configDoc = JSON.parse(readFileSync(join(work, 'configs.json'), 'utf-8')) as {
      species: Record<string, SpeciesConfigData>;
    };
    const api = new ApiClient(BASE);
    const species = await api.listSpecies();
    expect(species.length).toBe(2);

    // store each species' recipe first, as the operator would
    for (const s of species) {
      await api.putConfig(s.species_id, configDoc.species[s.name]);
    }

    const store = new ReviewStore(api);
    await store.refreshSpecies();

    // species 1: step through image by image (preview -> accept -> advance)
    await store.selectSpecies(1);
    expect(store.getState().candidate).toEqual(
      expect.objectContaining({ method: configDoc.species['species_a'].method }));
    while (store.getState().currentImageId !== null) {
      expect(store.getState().lastPreview).not.toBeNull(); // accept only after preview
      await store.acceptAndAdvance();
    }

    // species 2: one batch apply
    await store.selectSpecies(2);
    await store.batchApplyToSpecies();

    const progress = await api.progress();
    expect(progress.total_accepted).toBe(6);

    const cli = readTree(join(work, 'cli_labels'));
    const ui = readTree(join(work, 'ui_labels'));
    const cliLabels = [...cli.keys()].filter((k) => k.endsWith('.png')).sort();
    const uiLabels = [...ui.keys()].filter((k) => k.endsWith('.png')).sort();
    expect(uiLabels).toEqual(cliLabels);
    expect(uiLabels.length).toBe(6);
    for (const rel of uiLabels) {
      expect(ui.get(rel)!.equals(cli.get(rel)!), `bytes differ for ${rel}`).toBe(true);
    }
  }, 120000);

  it('preview mask bytes equal the accepted label bytes', async () => {
    const configDoc = JSON.parse(readFileSync(join(work, 'configs.json'), 'utf-8')) as {
      species: Record<string, SpeciesConfigData>;
    };
    const api = new ApiClient(BASE);
    const cfg = configDoc.species['species_a'];
    const preview = await api.preview(0, cfg);
    const accept = await api.accept(0, cfg);
    const stored = readFileSync(accept.label_path);
    expect(stored.equals(Buffer.from(preview.mask_png_base64, 'base64'))).toBe(true);
  }, 60000);

  it('progress persists across a service restart', async () => {
    await stopServer();
    await startServer();
    const api = new ApiClient(BASE);
    const progress = await api.progress();
    expect(progress.total_accepted).toBe(6);
    const species = await api.listSpecies();
    for (const s of species) {
      expect(s.accepted).toBe(s.total);
    }
  }, 60000);
});
