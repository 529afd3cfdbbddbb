// Thin typed client over the review service's /api/v1 endpoints.
// All mask/overlay pixels shown in the UI come from these responses;
// nothing is recomputed client-side.

import type { SpeciesConfigData } from './config.js';

export interface SpeciesSummary {
  species_id: number;
  name: string;
  accepted: number;
  total: number;
  config: SpeciesConfigData;
}

export interface ImageSummary {
  image_id: number;
  path: string;
  split: string;
  accepted: boolean;
}

export interface PreviewStats {
  foreground_fraction: number;
  method: string;
  mask_sha256: string;
  centroids?: number[][];
  foreground_clusters?: number[];
  threshold?: number;
  sigma_b2?: number;
}

export interface PreviewResponse {
  mask_png_base64: string;
  overlay_png_base64: string;
  stats: PreviewStats;
}

export interface AcceptResponse {
  label_path: string;
  config: SpeciesConfigData;
  species_id: number;
}

export interface Progress {
  species: { species_id: number; name: string; accepted: number; total: number }[];
  total_accepted: number;
  total_images: number;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await fetch(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${err}`);
    }
    if (!resp.ok) {
      const body = await resp.text().catch(() => '');
      throw new ApiError(resp.status, body || resp.statusText);
    }
    return (await resp.json()) as T;
  }

  listSpecies(): Promise<SpeciesSummary[]> {
    return this.request('/api/v1/species');
  }

  listImages(speciesId: number): Promise<ImageSummary[]> {
    return this.request(`/api/v1/species/${speciesId}/images`);
  }

  imageUrl(imageId: number): string {
    return `${this.baseUrl}/api/v1/images/${imageId}`;
  }

  preview(imageId: number, config: SpeciesConfigData,
          signal?: AbortSignal): Promise<PreviewResponse> {
    return this.request('/api/v1/preview', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ image_id: imageId, config }),
      signal,
    });
  }

  accept(imageId: number, config: SpeciesConfigData): Promise<AcceptResponse> {
    return this.request('/api/v1/accept', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ image_id: imageId, config }),
    });
  }

  putConfig(speciesId: number, config: SpeciesConfigData): Promise<unknown> {
    return this.request(`/api/v1/configs/${speciesId}`, {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(config),
    });
  }

  progress(): Promise<Progress> {
    return this.request('/api/v1/progress');
  }
}
