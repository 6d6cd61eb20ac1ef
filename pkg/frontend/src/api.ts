import {
  ApiError,
  ClipMeta,
  ReviewResponse,
  TaxonomyClass,
  TrackPayload,
  TracksResponse,
} from './types'

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

/** Thin typed wrapper over the annotation service; the UI's only data path. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init)
    if (!response.ok) {
      let error: ApiError = { detail: `${response.status}` }
      try {
        error = (await response.json()) as ApiError
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new Error(error.rule ? `${error.detail} [${error.rule}]` : error.detail)
    }
    return (await response.json()) as T
  }

  listClips(): Promise<ClipMeta[]> {
    return this.request<ClipMeta[]>('/clips')
  }

  getTracks(clipId: string): Promise<TracksResponse> {
    return this.request<TracksResponse>(`/clips/${encodeURIComponent(clipId)}/tracks`)
  }

  putTracks(clipId: string, tracks: TrackPayload[]): Promise<TracksResponse> {
    return this.request<TracksResponse>(
      `/clips/${encodeURIComponent(clipId)}/tracks`,
      {
        method: 'PUT',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ tracks }),
      },
    )
  }

  getTaxonomy(maxRiders = 5): Promise<TaxonomyClass[]> {
    return this.request<TaxonomyClass[]>(`/taxonomy?max_riders=${maxRiders}`)
  }

  getReview(clipId: string): Promise<ReviewResponse> {
    return this.request<ReviewResponse>(`/clips/${encodeURIComponent(clipId)}/review`)
  }

  frameUrl(clipId: string, frame: number): string {
    return `${this.baseUrl}/clips/${encodeURIComponent(clipId)}/frames/${frame}`
  }
}
