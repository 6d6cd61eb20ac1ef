import { Box, FrameBox } from './types'

export interface Keyframe {
  frame: number
  box: Box
}

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t
}

function lerpBox(a: Box, b: Box, t: number): Box {
  return {
    x: lerp(a.x, b.x, t),
    y: lerp(a.y, b.y, t),
    w: lerp(a.w, b.w, t),
    h: lerp(a.h, b.h, t),
  }
}

export function sortedKeyframes(keyframes: Keyframe[]): Keyframe[] {
  return [...keyframes].sort((a, b) => a.frame - b.frame)
}

/** Box shown at `frame`, or null outside the keyframed span. */
export function boxAt(keyframes: Keyframe[], frame: number): Box | null {
  const kfs = sortedKeyframes(keyframes)
  if (kfs.length === 0) return null
  const first = kfs[0]
  const last = kfs[kfs.length - 1]
  if (frame < first.frame || frame > last.frame) return null
  for (let i = 0; i < kfs.length - 1; i++) {
    const a = kfs[i]
    const b = kfs[i + 1]
    if (frame >= a.frame && frame <= b.frame) {
      if (a.frame === b.frame) return a.box
      return lerpBox(a.box, b.box, (frame - a.frame) / (b.frame - a.frame))
    }
  }
  return last.box
}

/**
 * One box per frame from the first to the last keyframe inclusive.
 * This is what gets saved; interpolation is only a preview convenience,
 * so the stored track never depends on it after save.
 */
export function materialize(keyframes: Keyframe[]): FrameBox[] {
  const kfs = sortedKeyframes(keyframes)
  if (kfs.length === 0) return []
  const out: FrameBox[] = []
  const first = kfs[0].frame
  const last = kfs[kfs.length - 1].frame
  for (let frame = first; frame <= last; frame++) {
    const box = boxAt(kfs, frame)
    if (box) out.push({ frame, ...box })
  }
  return out
}
