import { ApiClient } from './api'
import { newDraft, removeKeyframe, saveError, setKeyframe, toPayload, TrackDraft } from './draft'
import { POSITIONS, Position, SeatState } from './encoding'
import { boxAt } from './interpolate'
import { drawBox, drawReviewFrame, STATUS_COLORS } from './overlay'
import { ClipMeta, ReviewResponse, TrackPayload } from './types'

const api = new ApiClient()

interface State {
  clip: ClipMeta | null
  frame: number
  savedTracks: TrackPayload[]
  draft: TrackDraft | null
  review: ReviewResponse | null
  reviewMode: boolean
  dragStart: { x: number; y: number } | null
  dragBox: { x: number; y: number; w: number; h: number } | null
  status: string
}

const state: State = {
  clip: null,
  frame: 0,
  savedTracks: [],
  draft: null,
  review: null,
  reviewMode: false,
  dragStart: null,
  dragBox: null,
  status: '',
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

const canvas = el<HTMLCanvasElement>('frame-canvas')
const clipList = el<HTMLSelectElement>('clip-list')
const slider = el<HTMLInputElement>('frame-slider')
const frameLabel = el<HTMLSpanElement>('frame-label')
const classForm = el<HTMLDivElement>('class-form')
const labelPreview = el<HTMLSpanElement>('label-preview')
const saveButton = el<HTMLButtonElement>('save-track')
const newTrackButton = el<HTMLButtonElement>('new-track')
const deleteKeyframeButton = el<HTMLButtonElement>('delete-keyframe')
const reviewToggle = el<HTMLInputElement>('review-toggle')
const trackList = el<HTMLUListElement>('track-list')
const statusBar = el<HTMLDivElement>('status-bar')

const frameImage = new Image()
frameImage.onload = render

function setStatus(message: string): void {
  state.status = message
  statusBar.textContent = message
}

function nextTrackId(): string {
  const taken = new Set(state.savedTracks.map((t) => t.track_id))
  let i = 1
  while (taken.has(`t${i}`)) i++
  return `t${i}`
}

async function loadClips(): Promise<void> {
  const clips = await api.listClips()
  clipList.replaceChildren(
    ...clips.map((c) => {
      const option = document.createElement('option')
      option.value = c.clip_id
      option.textContent = `${c.clip_id} (${c.site_id}, ${c.track_count} tracks)`
      return option
    }),
  )
  if (clips.length > 0) await selectClip(clips[0])
  clipList.onchange = () => {
    const clip = clips.find((c) => c.clip_id === clipList.value)
    if (clip) void selectClip(clip)
  }
}

async function selectClip(clip: ClipMeta): Promise<void> {
  state.clip = clip
  state.frame = 0
  state.draft = null
  state.review = null
  canvas.width = clip.width
  canvas.height = clip.height
  slider.max = String(clip.frame_count - 1)
  slider.value = '0'
  const response = await api.getTracks(clip.clip_id)
  state.savedTracks = response.tracks
  if (state.reviewMode) await loadReview()
  renderTrackList()
  showFrame(0)
}

async function loadReview(): Promise<void> {
  if (!state.clip) return
  try {
    state.review = await api.getReview(state.clip.clip_id)
  } catch (error) {
    state.review = null
    setStatus(`review unavailable: ${String(error)}`)
  }
}

function showFrame(frame: number): void {
  if (!state.clip) return
  const clamped = Math.max(0, Math.min(frame, state.clip.frame_count - 1))
  state.frame = clamped
  slider.value = String(clamped)
  frameLabel.textContent = `frame ${clamped} / ${state.clip.frame_count - 1}`
  frameImage.src = api.frameUrl(state.clip.clip_id, clamped)
  render()
}

function render(): void {
  const ctx = canvas.getContext('2d')
  if (!ctx || !state.clip) return
  ctx.fillStyle = '#222'
  ctx.fillRect(0, 0, canvas.width, canvas.height)
  if (frameImage.complete && frameImage.naturalWidth > 0) {
    ctx.drawImage(frameImage, 0, 0, canvas.width, canvas.height)
  }
  if (state.reviewMode && state.review) {
    drawReviewFrame(ctx, state.review.ground_truth, state.review.detections,
      state.frame)
    return
  }
  for (const track of state.savedTracks) {
    const box = track.boxes.find((b) => b.frame === state.frame)
    if (box) drawBox(ctx, box, STATUS_COLORS.matched, false,
      `${track.track_id} ${track.label}`)
  }
  if (state.draft) {
    const preview = boxAt(state.draft.keyframes, state.frame)
    const isKeyframe = state.draft.keyframes.some((kf) => kf.frame === state.frame)
    if (preview) {
      drawBox(ctx, preview,
        isKeyframe ? STATUS_COLORS.keyframe : STATUS_COLORS.draft,
        !isKeyframe, state.draft.trackId)
    }
  }
  if (state.dragBox) drawBox(ctx, state.dragBox, STATUS_COLORS.draft, true)
}

function canvasPoint(event: MouseEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect()
  return {
    x: ((event.clientX - rect.left) / rect.width) * canvas.width,
    y: ((event.clientY - rect.top) / rect.height) * canvas.height,
  }
}

canvas.onmousedown = (event) => {
  if (state.reviewMode || !state.draft) return
  state.dragStart = canvasPoint(event)
}

canvas.onmousemove = (event) => {
  if (!state.dragStart) return
  const point = canvasPoint(event)
  state.dragBox = {
    x: Math.min(state.dragStart.x, point.x),
    y: Math.min(state.dragStart.y, point.y),
    w: Math.abs(point.x - state.dragStart.x),
    h: Math.abs(point.y - state.dragStart.y),
  }
  render()
}

canvas.onmouseup = () => {
  if (!state.dragStart || !state.draft) return
  const box = state.dragBox
  state.dragStart = null
  state.dragBox = null
  if (box) {
    try {
      setKeyframe(state.draft, state.frame, box)
      setStatus(`keyframe at frame ${state.frame}`)
    } catch (error) {
      setStatus(String(error))
    }
  }
  updateSaveState()
  render()
}

function buildClassForm(): void {
  classForm.replaceChildren(
    ...POSITIONS.map((pos) => {
      const row = document.createElement('div')
      row.className = 'seat-row'
      const name = document.createElement('span')
      name.textContent = pos
      row.appendChild(name)
      for (const value of ['absent', 'helmet', 'no-helmet'] as SeatState[]) {
        const label = document.createElement('label')
        const radio = document.createElement('input')
        radio.type = 'radio'
        radio.name = `seat-${pos}`
        radio.value = value
        radio.checked = value === 'absent'
        radio.onchange = () => {
          if (state.draft) {
            state.draft.selection[pos as Position] = value
            updateSaveState()
          }
        }
        label.append(radio, ` ${value}`)
        row.appendChild(label)
      }
      return row
    }),
  )
}

function syncClassForm(): void {
  if (!state.draft) return
  for (const pos of POSITIONS) {
    const value = state.draft.selection[pos]
    const radio = classForm.querySelector<HTMLInputElement>(
      `input[name="seat-${pos}"][value="${value}"]`)
    if (radio) radio.checked = true
  }
}

function updateSaveState(): void {
  if (!state.draft) {
    saveButton.disabled = true
    labelPreview.textContent = ''
    return
  }
  const error = saveError(state.draft)
  saveButton.disabled = error !== null
  if (error) {
    labelPreview.textContent = error
  } else {
    labelPreview.textContent = toPayload(state.draft).label
  }
}

function renderTrackList(): void {
  trackList.replaceChildren(
    ...state.savedTracks.map((track) => {
      const item = document.createElement('li')
      item.textContent =
        `${track.track_id}: ${track.label} (${track.boxes.length} boxes)`
      return item
    }),
  )
}

async function saveDraft(): Promise<void> {
  if (!state.clip || !state.draft || saveError(state.draft)) return
  const payload = toPayload(state.draft)
  const tracks = [
    ...state.savedTracks.filter((t) => t.track_id !== payload.track_id),
    payload,
  ]
  try {
    const response = await api.putTracks(state.clip.clip_id, tracks)
    state.savedTracks = response.tracks
    state.draft = null
    setStatus(`saved ${payload.track_id} (${payload.boxes.length} boxes)`)
  } catch (error) {
    setStatus(`save rejected: ${String(error)}`)
  }
  updateSaveState()
  renderTrackList()
  render()
}

function startTrack(): void {
  state.draft = newDraft(nextTrackId())
  syncClassForm()
  updateSaveState()
  setStatus(`drawing ${state.draft.trackId}: drag a box, pick the class`)
  render()
}

slider.oninput = () => showFrame(Number(slider.value))
newTrackButton.onclick = startTrack
saveButton.onclick = () => void saveDraft()
deleteKeyframeButton.onclick = () => {
  if (state.draft) {
    removeKeyframe(state.draft, state.frame)
    updateSaveState()
    render()
  }
}
reviewToggle.onchange = async () => {
  state.reviewMode = reviewToggle.checked
  if (state.reviewMode && !state.review) await loadReview()
  render()
}

document.onkeydown = (event) => {
  if (event.target instanceof HTMLInputElement && event.target.type !== 'range') {
    return
  }
  switch (event.key) {
    case 'ArrowLeft':
      showFrame(state.frame - 1)
      break
    case 'ArrowRight':
      showFrame(state.frame + 1)
      break
    case 'n':
      startTrack()
      break
    case 's':
      void saveDraft()
      break
  }
}

buildClassForm()
void loadClips().catch((error) => setStatus(String(error)))
