import { encodeSelection, Selection, selectionError, emptySelection } from './encoding'
import { Keyframe, materialize, sortedKeyframes } from './interpolate'
import { Box, TrackPayload } from './types'

/** An in-progress track: user-placed keyframes plus the class form state. */
export interface TrackDraft {
  trackId: string
  keyframes: Keyframe[]
  selection: Selection
}

export function newDraft(trackId: string): TrackDraft {
  return { trackId, keyframes: [], selection: emptySelection() }
}

/** Place or replace the keyframe at `frame`; zero-area boxes are rejected. */
export function setKeyframe(draft: TrackDraft, frame: number, box: Box): void {
  if (!(box.w > 0) || !(box.h > 0)) {
    throw new Error('zero-area box')
  }
  draft.keyframes = sortedKeyframes([
    ...draft.keyframes.filter((kf) => kf.frame !== frame),
    { frame, box },
  ])
}

export function removeKeyframe(draft: TrackDraft, frame: number): void {
  draft.keyframes = draft.keyframes.filter((kf) => kf.frame !== frame)
}

/** Why the draft cannot be saved yet, or null when it can. */
export function saveError(draft: TrackDraft): string | null {
  if (draft.keyframes.length === 0) return 'place at least one keyframe'
  return selectionError(draft.selection)
}

/**
 * Save payload: canonical class label plus one materialized box per frame
 * between the first and last keyframe.
 */
export function toPayload(draft: TrackDraft): TrackPayload {
  const error = saveError(draft)
  if (error) throw new Error(error)
  const label = encodeSelection(draft.selection)
  if (!label) throw new Error('invalid class selection')
  return {
    track_id: draft.trackId,
    label,
    boxes: materialize(draft.keyframes),
  }
}
