/** Wire types for the annotation service endpoints. */

export interface TaskPayload {
  tuple_id: string
  contract_id: string
  party: string
  /** sentence indices in the contract, aligned with `sentences` */
  members: number[]
  sentences: string[]
  context: string
  lease_seconds?: number
}

export interface Progress {
  tuples_total: number
  fully_annotated: number
  partially_annotated: number
  per_annotator: Record<string, number>
}

export type Role = "best" | "worst"

export interface SelectionState {
  /** display-slot indices (0..3), not sentence indices */
  best: number | null
  worst: number | null
  /** inline guard message, e.g. when best and worst would collide */
  message: string | null
}

export interface TaskView {
  task: TaskPayload
  /** display slot k shows task.sentences[slotOrder[k]] */
  slotOrder: number[]
  selection: SelectionState
}

export interface SubmitBody {
  tuple_id: string
  annotator_id: string
  best: number
  worst: number
}
