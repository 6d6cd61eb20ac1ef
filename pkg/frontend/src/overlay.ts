import { Box, ReviewDetection, ReviewGroundTruth } from './types'

export const STATUS_COLORS: Record<string, string> = {
  matched: '#2e9e44', // ground truth with a matching detection
  fn: '#d98f00', // ground truth the detector missed
  tp: '#2e9e44',
  fp: '#d62828',
  draft: '#3a86ff',
  keyframe: '#ffd166',
}

export function drawBox(
  ctx: CanvasRenderingContext2D,
  box: Box,
  color: string,
  dashed = false,
  caption?: string,
): void {
  ctx.save()
  ctx.strokeStyle = color
  ctx.lineWidth = 2
  ctx.setLineDash(dashed ? [6, 4] : [])
  ctx.strokeRect(box.x, box.y, box.w, box.h)
  if (caption) {
    ctx.setLineDash([])
    ctx.font = '12px sans-serif'
    const width = ctx.measureText(caption).width + 6
    ctx.fillStyle = color
    ctx.fillRect(box.x, box.y - 16, width, 16)
    ctx.fillStyle = '#fff'
    ctx.fillText(caption, box.x + 3, box.y - 4)
  }
  ctx.restore()
}

/** Review mode: GT solid, detections dashed, colored by TP/FP/FN status. */
export function drawReviewFrame(
  ctx: CanvasRenderingContext2D,
  groundTruth: ReviewGroundTruth[],
  detections: ReviewDetection[],
  frame: number,
): void {
  for (const g of groundTruth) {
    if (g.frame !== frame) continue
    drawBox(ctx, g, STATUS_COLORS[g.status], false, `${g.track_id} ${g.label}`)
  }
  for (const d of detections) {
    if (d.frame !== frame) continue
    drawBox(ctx, d, STATUS_COLORS[d.status], true,
      `${d.label} ${d.confidence.toFixed(2)}`)
  }
}
