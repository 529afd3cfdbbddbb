// UI state machine, kept free of DOM so the review flow is testable
// headless: browse species -> tune config -> preview -> accept/advance.

import { ApiClient, ApiError, ImageSummary, PreviewResponse, SpeciesSummary } from './api.js';
import { SpeciesConfigData, defaultConfig, validateConfig } from './config.js';
import { debounce, Debounced } from './debounce.js';

export interface UiState {
  species: SpeciesSummary[];
  currentSpeciesId: number | null;
  images: ImageSummary[];
  currentImageId: number | null;
  candidate: SpeciesConfigData;
  lastPreview: PreviewResponse | null;
  previewPending: boolean;
  overlayOpacity: number;
  error: string | null;
}

type Listener = (state: UiState) => void;

export const PREVIEW_DEBOUNCE_MS = 300;

export class ReviewStore {
  private state: UiState = {
    species: [],
    currentSpeciesId: null,
    images: [],
    currentImageId: null,
    candidate: defaultConfig(),
    lastPreview: null,
    previewPending: false,
    overlayOpacity: 0.5,
    error: null,
  };

  private listeners: Listener[] = [];
  private previewSeq = 0;
  private inflight: AbortController | null = null;
  private readonly schedulePreview: Debounced<[]>;

  constructor(private readonly api: ApiClient,
              debounceMs: number = PREVIEW_DEBOUNCE_MS) {
    this.schedulePreview = debounce(() => { void this.requestPreview(); }, debounceMs);
  }

  getState(): UiState {
    return this.state;
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }

  private update(patch: Partial<UiState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  async refreshSpecies(): Promise<void> {
    try {
      const species = await this.api.listSpecies();
      this.update({ species, error: null });
    } catch (err) {
      this.update({ error: describe(err) });
    }
  }

  async selectSpecies(speciesId: number): Promise<void> {
    try {
      const images = await this.api.listImages(speciesId);
      const summary = this.state.species.find((s) => s.species_id === speciesId);
      // the species' stored config becomes the candidate default
      const candidate = summary ? { ...defaultConfig(), ...summary.config }
                                : defaultConfig();
      this.update({
        currentSpeciesId: speciesId,
        images,
        currentImageId: null,
        candidate,
        lastPreview: null,
        error: null,
      });
      const next = images.find((i) => !i.accepted) ?? images[0];
      if (next) await this.selectImage(next.image_id);
    } catch (err) {
      this.update({ error: describe(err) });
    }
  }

  async selectImage(imageId: number): Promise<void> {
    this.schedulePreview.cancel();
    this.update({ currentImageId: imageId, lastPreview: null, error: null });
    await this.requestPreview();
  }

  /** Apply a config edit. Invalid edits are rejected before any request is
   * made; valid ones schedule a debounced preview. */
  editConfig(patch: Partial<SpeciesConfigData>): string[] {
    const candidate = { ...this.state.candidate, ...patch };
    const problems = validateConfig(candidate);
    if (problems.length > 0) {
      return problems;
    }
    this.update({ candidate });
    if (this.state.currentImageId !== null) {
      this.update({ previewPending: true });
      this.schedulePreview();
    }
    return [];
  }

  /** Pure client-side view option; never triggers a request. */
  setOverlayOpacity(opacity: number): void {
    this.update({ overlayOpacity: Math.min(1, Math.max(0, opacity)) });
  }

  private async requestPreview(): Promise<void> {
    const imageId = this.state.currentImageId;
    if (imageId === null) return;
    const seq = ++this.previewSeq;
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    this.update({ previewPending: true });
    try {
      const preview = await this.api.preview(imageId, this.state.candidate,
                                             controller.signal);
      if (seq === this.previewSeq) {
        this.update({ lastPreview: preview, previewPending: false, error: null });
      }
    } catch (err) {
      if (seq === this.previewSeq && !controller.signal.aborted) {
        this.update({ previewPending: false, error: describe(err) });
      }
    }
  }

  /** Accept the current image with the candidate config, then advance to
   * the species' next pending image. Requires a preview to exist. */
  async acceptAndAdvance(): Promise<void> {
    const { currentImageId, currentSpeciesId, lastPreview } = this.state;
    if (currentImageId === null || currentSpeciesId === null) return;
    if (lastPreview === null) {
      this.update({ error: 'preview the image before accepting' });
      return;
    }
    try {
      await this.api.accept(currentImageId, this.state.candidate);
      const images = await this.api.listImages(currentSpeciesId);
      this.update({ images, error: null });
      await this.refreshSpecies();
      const next = images.find((i) => !i.accepted);
      if (next) {
        await this.selectImage(next.image_id);
      } else {
        this.update({ currentImageId: null, lastPreview: null });
      }
    } catch (err) {
      this.update({ error: describe(err) });
    }
  }

  /** Store the candidate as the species default and annotate every image
   * of the species that is not yet accepted, server-side. */
  async batchApplyToSpecies(): Promise<void> {
    const speciesId = this.state.currentSpeciesId;
    if (speciesId === null) return;
    try {
      await this.api.putConfig(speciesId, this.state.candidate);
      const images = await this.api.listImages(speciesId);
      for (const image of images) {
        if (!image.accepted) {
          await this.api.accept(image.image_id, this.state.candidate);
        }
      }
      this.update({ images: await this.api.listImages(speciesId), error: null });
      await this.refreshSpecies();
    } catch (err) {
      this.update({ error: describe(err) });
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.status === 0 ? err.message : `service error ${err.status}: ${err.message}`;
  }
  return String(err);
}
