export interface Box {
  x: number
  y: number
  w: number
  h: number
}

export interface FrameBox extends Box {
  frame: number
}

export interface ClipMeta {
  clip_id: string
  site_id: string
  start_timestamp: string
  fps: number
  frame_count: number
  width: number
  height: number
  track_count: number
}

export interface TrackPayload {
  track_id: string
  label: string
  boxes: FrameBox[]
}

export interface TracksResponse {
  clip_id: string
  tracks: TrackPayload[]
}

export interface TaxonomyClass {
  label: string
  riders: number
  helmeted: number
  positions: { position: string; helmet: boolean }[]
}

export type GroundTruthStatus = 'matched' | 'fn'
export type DetectionStatus = 'tp' | 'fp'

export interface ReviewGroundTruth extends FrameBox {
  track_id: string
  label: string
  status: GroundTruthStatus
}

export interface ReviewDetection extends FrameBox {
  label: string
  confidence: number
  status: DetectionStatus
}

export interface ReviewResponse {
  clip_id: string
  ground_truth: ReviewGroundTruth[]
  detections: ReviewDetection[]
}

export interface ApiError {
  detail: string
  rule?: string
}
