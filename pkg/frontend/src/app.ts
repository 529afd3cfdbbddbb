// DOM wiring for the review tool: species list on the left, side-by-side
// original/overlay viewers with shared zoom+pan, and the parameter panel.

import { ApiClient } from './api.js';
import { SpeciesConfigData, snapKernel } from './config.js';
import { ReviewStore, UiState } from './store.js';

interface ViewTransform { scale: number; x: number; y: number; }

export function mountApp(rootEl: HTMLElement, api = new ApiClient('')): ReviewStore {
  const store = new ReviewStore(api);

  rootEl.innerHTML = `
    <div class="layout">
      <aside id="species-panel"><h2>Species</h2><ul id="species-list"></ul></aside>
      <main>
        <div id="error-banner" class="banner hidden"></div>
        <div id="image-strip"></div>
        <div class="viewers">
          <figure><figcaption>original</figcaption><canvas id="canvas-src"></canvas></figure>
          <figure><figcaption>overlay</figcaption><canvas id="canvas-ovl"></canvas></figure>
        </div>
        <section id="param-panel">
          <div class="row" id="method-row">
            <label><input type="radio" name="method" value="kmeans" data-k="2"> k-means k=2</label>
            <label><input type="radio" name="method" value="kmeans" data-k="3"> k-means k=3</label>
            <label><input type="radio" name="method" value="otsu"> otsu</label>
          </div>
          <div class="row" id="cluster-row"><span>bacteria clusters:</span><span id="cluster-swatches"></span></div>
          <div class="row">
            <label>kernel <input id="kernel-slider" type="range" min="1" max="31" step="2" value="9">
              <span id="kernel-value">9</span></label>
            <label>cleanup
              <select id="cleanup-select">
                <option value="close">close</option>
                <option value="open">open</option>
                <option value="none">none</option>
              </select></label>
            <label>overlay opacity <input id="opacity-slider" type="range" min="0" max="100" value="50"></label>
          </div>
          <div class="row" id="stats-row"></div>
          <div class="row">
            <button id="accept-btn">accept &amp; next</button>
            <button id="batch-btn">apply to whole species</button>
          </div>
        </section>
      </main>
    </div>`;

  const els = {
    speciesList: byId<HTMLUListElement>('species-list'),
    errorBanner: byId<HTMLDivElement>('error-banner'),
    imageStrip: byId<HTMLDivElement>('image-strip'),
    canvasSrc: byId<HTMLCanvasElement>('canvas-src'),
    canvasOvl: byId<HTMLCanvasElement>('canvas-ovl'),
    clusterSwatches: byId<HTMLSpanElement>('cluster-swatches'),
    kernelSlider: byId<HTMLInputElement>('kernel-slider'),
    kernelValue: byId<HTMLSpanElement>('kernel-value'),
    cleanupSelect: byId<HTMLSelectElement>('cleanup-select'),
    opacitySlider: byId<HTMLInputElement>('opacity-slider'),
    statsRow: byId<HTMLDivElement>('stats-row'),
    acceptBtn: byId<HTMLButtonElement>('accept-btn'),
    batchBtn: byId<HTMLButtonElement>('batch-btn'),
  };

  function byId<T extends HTMLElement>(id: string): T {
    return rootEl.querySelector(`#${id}`) as T;
  }

  const view: ViewTransform = { scale: 1, x: 0, y: 0 };
  let srcBitmap: ImageBitmap | null = null;
  let ovlBitmap: ImageBitmap | null = null;
  let loadedImageId: number | null = null;
  let loadedOverlayB64: string | null = null;

  // --- parameter panel events ---

  rootEl.querySelectorAll<HTMLInputElement>('#method-row input').forEach((radio) => {
    radio.addEventListener('change', () => {
      const patch: Partial<SpeciesConfigData> =
        radio.value === 'otsu'
          ? { method: 'otsu', polarity: 'dark' }
          : { method: 'kmeans', k: Number(radio.dataset.k), foreground: 'darkest' };
      store.editConfig(patch);
    });
  });

  els.kernelSlider.addEventListener('input', () => {
    const snapped = snapKernel(Number(els.kernelSlider.value));
    els.kernelSlider.value = String(snapped);
    els.kernelValue.textContent = String(snapped);
    store.editConfig({ kernel_diameter: snapped });
  });

  els.cleanupSelect.addEventListener('change', () => {
    store.editConfig({ cleanup: els.cleanupSelect.value as SpeciesConfigData['cleanup'] });
  });

  els.opacitySlider.addEventListener('input', () => {
    // pure client-side composite: no preview request
    store.setOverlayOpacity(Number(els.opacitySlider.value) / 100);
  });

  els.acceptBtn.addEventListener('click', () => void store.acceptAndAdvance());
  els.batchBtn.addEventListener('click', () => {
    const state = store.getState();
    const pending = state.images.filter((i) => !i.accepted).length;
    const accepted = state.images.length - pending;
    const msg = accepted > 0
      ? `Re-annotate ${state.images.length} images (overwrites ${accepted} accepted labels)?`
      : `Annotate ${pending} images with the current config?`;
    if (window.confirm(msg)) void store.batchApplyToSpecies();
  });

  // shared zoom/pan on both canvases
  for (const canvas of [els.canvasSrc, els.canvasOvl]) {
    canvas.addEventListener('wheel', (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
      view.scale = Math.min(16, Math.max(0.1, view.scale * factor));
      drawViewers(store.getState());
    });
    let dragging = false;
    let last = { x: 0, y: 0 };
    canvas.addEventListener('mousedown', (ev) => {
      dragging = true;
      last = { x: ev.clientX, y: ev.clientY };
    });
    window.addEventListener('mouseup', () => { dragging = false; });
    window.addEventListener('mousemove', (ev) => {
      if (!dragging) return;
      view.x += ev.clientX - last.x;
      view.y += ev.clientY - last.y;
      last = { x: ev.clientX, y: ev.clientY };
      drawViewers(store.getState());
    });
  }

  // --- rendering ---

  function render(state: UiState): void {
    renderError(state);
    renderSpecies(state);
    renderImageStrip(state);
    renderPanel(state);
    void loadBitmaps(state).then(() => drawViewers(state));
    renderStats(state);
  }

  function renderError(state: UiState): void {
    els.errorBanner.classList.toggle('hidden', state.error === null);
    if (state.error !== null) {
      els.errorBanner.textContent = `${state.error} `;
      const retry = document.createElement('button');
      retry.textContent = 'retry';
      retry.addEventListener('click', () => void store.refreshSpecies());
      els.errorBanner.appendChild(retry);
    }
  }

  function renderSpecies(state: UiState): void {
    els.speciesList.innerHTML = '';
    for (const s of state.species) {
      const li = document.createElement('li');
      li.textContent = `${s.name} (${s.accepted}/${s.total})`;
      li.classList.toggle('active', s.species_id === state.currentSpeciesId);
      li.addEventListener('click', () => void store.selectSpecies(s.species_id));
      els.speciesList.appendChild(li);
    }
  }

  function renderImageStrip(state: UiState): void {
    els.imageStrip.innerHTML = '';
    for (const img of state.images) {
      const chip = document.createElement('button');
      chip.textContent = `${img.path.split('/').pop()}${img.accepted ? ' ✓' : ''}`;
      chip.classList.toggle('active', img.image_id === state.currentImageId);
      chip.addEventListener('click', () => void store.selectImage(img.image_id));
      els.imageStrip.appendChild(chip);
    }
  }

  function renderPanel(state: UiState): void {
    const cfg = state.candidate;
    rootEl.querySelectorAll<HTMLInputElement>('#method-row input').forEach((radio) => {
      radio.checked = radio.value === cfg.method &&
        (cfg.method === 'otsu' || Number(radio.dataset.k) === cfg.k);
    });
    els.kernelSlider.value = String(cfg.kernel_diameter);
    els.kernelValue.textContent = String(cfg.kernel_diameter);
    els.cleanupSelect.value = cfg.cleanup;

    // cluster picker fed by the preview's centroid swatches
    els.clusterSwatches.innerHTML = '';
    const centroids = state.lastPreview?.stats.centroids ?? [];
    const chosen = new Set(
      Array.isArray(cfg.foreground) ? cfg.foreground
        : (state.lastPreview?.stats.foreground_clusters ?? []));
    centroids.forEach((rgb, idx) => {
      const sw = document.createElement('button');
      sw.className = 'swatch';
      sw.style.backgroundColor = `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
      sw.classList.toggle('chosen', chosen.has(idx));
      sw.title = `cluster ${idx}`;
      sw.addEventListener('click', () => {
        const next = new Set(chosen);
        if (next.has(idx)) next.delete(idx); else next.add(idx);
        store.editConfig({ foreground: [...next].sort((a, b) => a - b) });
      });
      els.clusterSwatches.appendChild(sw);
    });
  }

  function renderStats(state: UiState): void {
    const stats = state.lastPreview?.stats;
    if (!stats) {
      els.statsRow.textContent = state.previewPending ? 'computing preview…' : '';
      return;
    }
    const parts = [`foreground ${(stats.foreground_fraction * 100).toFixed(2)}%`];
    if (stats.threshold !== undefined) parts.push(`otsu threshold ${stats.threshold}`);
    if (stats.centroids) parts.push(`${stats.centroids.length} clusters`);
    parts.push(`label sha256 ${stats.mask_sha256.slice(0, 12)}…`);
    if (state.previewPending) parts.push('updating…');
    els.statsRow.textContent = parts.join(' · ');
  }

  async function loadBitmaps(state: UiState): Promise<void> {
    if (state.currentImageId === null) {
      srcBitmap = ovlBitmap = null;
      loadedImageId = null;
      return;
    }
    if (state.currentImageId !== loadedImageId) {
      loadedImageId = state.currentImageId;
      loadedOverlayB64 = null;
      const resp = await fetch(api.imageUrl(state.currentImageId));
      srcBitmap = await createImageBitmap(await resp.blob());
      view.scale = 1; view.x = 0; view.y = 0;
    }
    const b64 = state.lastPreview?.overlay_png_base64 ?? null;
    if (b64 !== loadedOverlayB64) {
      loadedOverlayB64 = b64;
      ovlBitmap = b64 === null ? null
        : await createImageBitmap(await (await fetch(`data:image/png;base64,${b64}`)).blob());
    }
  }

  function drawViewers(state: UiState): void {
    for (const [canvas, kind] of [[els.canvasSrc, 'src'], [els.canvasOvl, 'ovl']] as const) {
      const ctx = canvas.getContext('2d');
      if (!ctx) continue;
      canvas.width = canvas.clientWidth || 480;
      canvas.height = canvas.clientHeight || 360;
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      if (!srcBitmap) continue;
      const fit = Math.min(canvas.width / srcBitmap.width, canvas.height / srcBitmap.height);
      ctx.setTransform(fit * view.scale, 0, 0, fit * view.scale, view.x, view.y);
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(srcBitmap, 0, 0);
      if (kind === 'ovl' && ovlBitmap) {
        ctx.globalAlpha = state.overlayOpacity;
        // overlay PNG may be a downscaled render; stretch onto the source frame
        ctx.drawImage(ovlBitmap, 0, 0, srcBitmap.width, srcBitmap.height);
        ctx.globalAlpha = 1;
      }
    }
  }

  store.subscribe(render);
  void store.refreshSpecies();
  return store;
}
