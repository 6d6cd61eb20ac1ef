/**
 * Rider/helmet class encoding mirroring the server's taxonomy rules:
 * positions in fixed order (driver, then passenger seats P0..P3), each
 * present rider contributing "<Pos>Helmet" or "<Pos>NoHelmet", driver
 * always required.  The server stays authoritative; this module exists
 * so the form can disable save and show the label before a round trip.
 */

export const POSITIONS = ['D', 'P0', 'P1', 'P2', 'P3'] as const
export type Position = (typeof POSITIONS)[number]

/** One form row: the seat is empty, or occupied with/without a helmet. */
export type SeatState = 'absent' | 'helmet' | 'no-helmet'

export type Selection = Record<Position, SeatState>

export function emptySelection(): Selection {
  return { D: 'absent', P0: 'absent', P1: 'absent', P2: 'absent', P3: 'absent' }
}

export function selectionError(selection: Selection): string | null {
  if (selection.D === 'absent') return 'a driver is required'
  return null
}

/** Canonical label for the selection, or null while it is invalid. */
export function encodeSelection(selection: Selection): string | null {
  if (selectionError(selection)) return null
  let label = ''
  for (const pos of POSITIONS) {
    const state = selection[pos]
    if (state === 'absent') continue
    label += pos + (state === 'helmet' ? 'Helmet' : 'NoHelmet')
  }
  return label
}

/** Inverse of encodeSelection, for editing an existing track. */
export function decodeLabel(label: string): Selection {
  const selection = emptySelection()
  let rest = label
  let lastIndex = -1
  while (rest.length > 0) {
    // longest match first: P0..P3 before D, NoHelmet before Helmet
    const pos = POSITIONS.find((p) => p !== 'D' && rest.startsWith(p)) ??
      (rest.startsWith('D') ? 'D' : null)
    if (!pos) throw new Error(`unrecognized position at "${rest}"`)
    rest = rest.slice(pos.length)
    let state: SeatState
    if (rest.startsWith('NoHelmet')) {
      state = 'no-helmet'
      rest = rest.slice('NoHelmet'.length)
    } else if (rest.startsWith('Helmet')) {
      state = 'helmet'
      rest = rest.slice('Helmet'.length)
    } else {
      throw new Error(`missing helmet state after "${pos}"`)
    }
    const index = POSITIONS.indexOf(pos)
    if (index <= lastIndex) throw new Error(`"${pos}" out of canonical order`)
    lastIndex = index
    selection[pos] = state
  }
  if (selection.D === 'absent') throw new Error('a driver is required')
  return selection
}
