/** DOM controller: one task on screen, server-authoritative state.
 *
 * Mouse clicks and keyboard shortcuts funnel into the same handleSelect /
 * handleSubmit methods. Submission is de-duplicated with an in-flight flag;
 * an expired lease triggers a refetch of the current assignment.
 */

import { fetchNext, fetchProgress, submitAnnotation, type ApiConfig } from "./api.js"
import { keyToAction } from "./keyboard.js"
import { buildSubmission, canSubmit, newTaskView, select, slotSentence } from "./state.js"
import type { Progress, Role, TaskView } from "./types.js"

type Screen = "loading" | "task" | "done" | "retry"

export class App {
  private view: TaskView | null = null
  private screen: Screen = "loading"
  private banner = ""
  private activeRole: Role = "best"
  private submitting = false
  private progress: Progress | null = null

  constructor(
    private root: HTMLElement,
    private cfg: ApiConfig,
    private annotatorId: string,
  ) {}

  async start(): Promise<void> {
    this.root.addEventListener("click", (ev) => this.onClick(ev))
    this.root.ownerDocument.addEventListener("keydown", (ev) => this.onKey(ev))
    await this.refreshProgress()
    await this.loadNext()
  }

  private async refreshProgress(): Promise<void> {
    this.progress = await fetchProgress(this.cfg)
  }

  async loadNext(): Promise<void> {
    this.screen = "loading"
    this.render()
    const result = await fetchNext(this.cfg, this.annotatorId)
    if (result.kind === "task") {
      this.view = newTaskView(result.task)
      this.activeRole = "best"
      this.screen = "task"
    } else if (result.kind === "done") {
      this.view = null
      this.screen = "done"
    } else {
      this.view = null
      this.screen = "retry"
      this.banner = `Could not reach the annotation service (${result.detail})`
    }
    this.render()
  }

  handleSelect(slot: number, role: Role): void {
    if (!this.view || this.submitting) return
    this.view = select(this.view, slot, role)
    this.render()
  }

  setRole(role: Role): void {
    this.activeRole = role
    this.render()
  }

  async handleSubmit(): Promise<void> {
    if (!this.view || this.submitting) return
    const body = buildSubmission(this.view, this.annotatorId)
    if (body === null) return
    this.submitting = true
    this.render()
    const result = await submitAnnotation(this.cfg, body)
    this.submitting = false
    if (result.kind === "ok") {
      this.banner = ""
      await this.refreshProgress()
      await this.loadNext()
    } else if (result.kind === "lease_expired") {
      this.banner = "Assignment lease expired; fetching a fresh task"
      await this.loadNext()
    } else if (result.kind === "no_such_assignment") {
      this.banner = "Assignment no longer valid; fetching a fresh task"
      await this.loadNext()
    } else if (result.kind === "invalid_pick") {
      this.banner = `Rejected by the service: ${result.detail}`
      this.render()
    } else {
      this.banner = "Submission failed (network); your picks are kept, try again"
      this.render()
    }
  }

  private onClick(ev: Event): void {
    const el = ev.target as HTMLElement | null
    if (!el) return
    if (el.id === "submit") {
      void this.handleSubmit()
      return
    }
    if (el.id === "retry-btn") {
      void this.loadNext()
      return
    }
    const role = el.getAttribute("data-role")
    const slot = el.getAttribute("data-slot")
    if (role === "best" || role === "worst") {
      if (slot !== null) this.handleSelect(Number(slot), role)
    }
  }

  private onKey(ev: KeyboardEvent): void {
    if (this.screen !== "task") return
    const action = keyToAction(ev.key)
    if (!action) return
    ev.preventDefault()
    if (action.type === "slot") this.handleSelect(action.slot, this.activeRole)
    else if (action.type === "role") this.setRole(action.role)
    else void this.handleSubmit()
  }

  currentView(): TaskView | null {
    return this.view
  }

  private progressLine(): string {
    if (!this.progress) return ""
    const mine = this.progress.per_annotator[this.annotatorId] ?? 0
    return `${mine} done by you &middot; ${this.progress.fully_annotated}/${this.progress.tuples_total} tuples fully annotated`
  }

  private render(): void {
    const parts: string[] = []
    parts.push(`<header><h1>Sentence importance annotation</h1>`)
    parts.push(`<div id="progress">${this.progressLine()}</div></header>`)
    if (this.banner) parts.push(`<div id="banner">${escapeHtml(this.banner)}</div>`)

    if (this.screen === "loading") {
      parts.push(`<p id="loading">Loading&hellip;</p>`)
    } else if (this.screen === "done") {
      parts.push(`<div id="done"><h2>No work remaining</h2><p>Every available tuple has your annotation. Thank you!</p></div>`)
    } else if (this.screen === "retry") {
      parts.push(`<div id="retry"><button id="retry-btn">Retry</button></div>`)
    } else if (this.view) {
      const v = this.view
      parts.push(`<p id="context">${escapeHtml(v.task.context)}</p>`)
      parts.push(
        `<p id="instruction">Pick the <strong>most important</strong> (best) and <strong>least important</strong> (worst) sentence for <strong>${escapeHtml(v.task.party)}</strong>.</p>`,
      )
      parts.push(`<ol id="slots">`)
      for (let slot = 0; slot < v.task.members.length; slot++) {
        const classes = ["slot"]
        if (v.selection.best === slot) classes.push("is-best")
        if (v.selection.worst === slot) classes.push("is-worst")
        parts.push(`<li class="${classes.join(" ")}" data-slot-item="${slot}">`)
        parts.push(`<span class="sentence">${escapeHtml(slotSentence(v, slot))}</span>`)
        parts.push(`<span class="controls">`)
        parts.push(
          `<button data-role="best" data-slot="${slot}" ${this.submitting ? "disabled" : ""}>${v.selection.best === slot ? "&#10003; Best" : "Best"}</button>`,
        )
        parts.push(
          `<button data-role="worst" data-slot="${slot}" ${this.submitting ? "disabled" : ""}>${v.selection.worst === slot ? "&#10007; Worst" : "Worst"}</button>`,
        )
        parts.push(`</span></li>`)
      }
      parts.push(`</ol>`)
      if (v.selection.message) parts.push(`<div id="message">${escapeHtml(v.selection.message)}</div>`)
      const disabled = !canSubmit(v) || this.submitting ? "disabled" : ""
      parts.push(`<button id="submit" ${disabled}>${this.submitting ? "Submitting&hellip;" : "Submit"}</button>`)
      parts.push(
        `<p id="rolehint">Keys: 1&ndash;4 mark a sentence as <strong>${this.activeRole}</strong>, B/W switch role, Enter submits.</p>`,
      )
    }
    this.root.innerHTML = parts.join("")
  }
}

function escapeHtml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;")
}
