/** Pure selection-state machine for one task view.
 *
 * All transitions go through select(); the guard makes a best=worst
 * submission unrepresentable, mirroring the server-side validation.
 */

import { seededSlotOrder } from "./shuffle.js"
import type { Role, SelectionState, SubmitBody, TaskPayload, TaskView } from "./types.js"

export const COLLISION_MESSAGE = "Best and worst must be different sentences"

export function newTaskView(task: TaskPayload): TaskView {
  return {
    task,
    slotOrder: seededSlotOrder(task.tuple_id, task.members.length),
    selection: { best: null, worst: null, message: null },
  }
}

/** Toggle `role` on a display slot. Re-selecting clears it; claiming the slot
 * already held by the other role is blocked with an inline message. */
export function select(view: TaskView, slot: number, role: Role): TaskView {
  const sel = view.selection
  const other: Role = role === "best" ? "worst" : "best"
  let next: SelectionState
  if (sel[role] === slot) {
    next = { ...sel, [role]: null, message: null }
  } else if (sel[other] === slot) {
    next = { ...sel, message: COLLISION_MESSAGE }
  } else {
    next = { ...sel, [role]: slot, message: null }
  }
  return { ...view, selection: next }
}

export function canSubmit(view: TaskView): boolean {
  const { best, worst } = view.selection
  return best !== null && worst !== null && best !== worst
}

/** Map the selected display slots back to sentence indices. */
export function buildSubmission(view: TaskView, annotatorId: string): SubmitBody | null {
  if (!canSubmit(view)) return null
  const { best, worst } = view.selection
  return {
    tuple_id: view.task.tuple_id,
    annotator_id: annotatorId,
    best: view.task.members[view.slotOrder[best as number]],
    worst: view.task.members[view.slotOrder[worst as number]],
  }
}

/** Sentence text shown in a display slot. */
export function slotSentence(view: TaskView, slot: number): string {
  return view.task.sentences[view.slotOrder[slot]]
}
