/** Thin fetch wrappers over the four service endpoints. */

import type { Progress, SubmitBody, TaskPayload } from "./types.js"

export interface ApiConfig {
  base: string
  fetchFn: typeof fetch
}

export type NextResult =
  | { kind: "task"; task: TaskPayload }
  | { kind: "done" }
  | { kind: "network-error"; detail: string }

export type SubmitResult =
  | { kind: "ok"; duplicate: boolean }
  | { kind: "invalid_pick"; detail: string }
  | { kind: "lease_expired"; detail: string }
  | { kind: "no_such_assignment"; detail: string }
  | { kind: "network-error"; detail: string }

export async function fetchNext(cfg: ApiConfig, annotatorId: string): Promise<NextResult> {
  let res: Response
  try {
    res = await cfg.fetchFn(`${cfg.base}/api/tasks/next?annotator=${encodeURIComponent(annotatorId)}`)
  } catch (e) {
    return { kind: "network-error", detail: String(e) }
  }
  if (res.status === 404) return { kind: "done" }
  if (!res.ok) return { kind: "network-error", detail: `HTTP ${res.status}` }
  return { kind: "task", task: (await res.json()) as TaskPayload }
}

export async function submitAnnotation(cfg: ApiConfig, body: SubmitBody): Promise<SubmitResult> {
  let res: Response
  try {
    res = await cfg.fetchFn(`${cfg.base}/api/annotations`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    })
  } catch (e) {
    return { kind: "network-error", detail: String(e) }
  }
  if (res.ok) {
    const data = (await res.json()) as { duplicate?: boolean }
    return { kind: "ok", duplicate: Boolean(data.duplicate) }
  }
  const data = (await res.json().catch(() => ({}))) as { error?: string; detail?: string }
  const detail = data.detail ?? `HTTP ${res.status}`
  if (data.error === "invalid_pick") return { kind: "invalid_pick", detail }
  if (data.error === "lease_expired") return { kind: "lease_expired", detail }
  if (data.error === "no_such_assignment") return { kind: "no_such_assignment", detail }
  return { kind: "network-error", detail }
}

export async function fetchProgress(cfg: ApiConfig): Promise<Progress | null> {
  try {
    const res = await cfg.fetchFn(`${cfg.base}/api/progress`)
    if (!res.ok) return null
    return (await res.json()) as Progress
  } catch {
    return null
  }
}

export async function fetchExport(cfg: ApiConfig): Promise<string | null> {
  try {
    const res = await cfg.fetchFn(`${cfg.base}/api/export`)
    if (!res.ok) return null
    return await res.text()
  } catch {
    return null
  }
}
