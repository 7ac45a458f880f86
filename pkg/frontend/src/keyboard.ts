/** Keyboard mapping: 1-4 toggle the active role on a slot, B/W switch the
 * active role, Enter submits. Keyboard and mouse paths funnel into the same
 * select()/submit() calls, so their payloads are identical by construction.
 */

import type { Role } from "./types.js"

export type KeyAction =
  | { type: "slot"; slot: number }
  | { type: "role"; role: Role }
  | { type: "submit" }

export function keyToAction(key: string): KeyAction | null {
  if (key >= "1" && key <= "4") return { type: "slot", slot: Number(key) - 1 }
  const k = key.toLowerCase()
  if (k === "b") return { type: "role", role: "best" }
  if (k === "w") return { type: "role", role: "worst" }
  if (key === "Enter") return { type: "submit" }
  return null
}
