import { beforeEach, describe, expect, it } from "vitest"

import { App } from "../src/app"
import { keyToAction } from "../src/keyboard"
import type { SubmitBody, TaskPayload } from "../src/types"

function makeTask(n: number): TaskPayload {
  return {
    tuple_id: `c1:Tenant:${String(n).padStart(4, "0")}`,
    contract_id: "c1",
    party: "Tenant",
    members: [4 * n, 4 * n + 1, 4 * n + 2, 4 * n + 3],
    sentences: [`s${4 * n}`, `s${4 * n + 1}`, `s${4 * n + 2}`, `s${4 * n + 3}`],
    context: "Contract c1, judged for party Tenant",
  }
}

/** In-memory stand-in for the annotation service. */
class FakeServer {
  tasks: TaskPayload[]
  submissions: SubmitBody[] = []
  posts = 0
  failNextFetch = false
  expireNextSubmit = false

  constructor(tasks: TaskPayload[]) {
    this.tasks = [...tasks]
  }

  fetchFn = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input)
    if (url.includes("/api/tasks/next")) {
      if (this.failNextFetch) {
        this.failNextFetch = false
        throw new TypeError("fetch failed")
      }
      if (this.tasks.length === 0) {
        return new Response(JSON.stringify({ error: "no_work_remaining" }), { status: 404 })
      }
      return new Response(JSON.stringify(this.tasks[0]), { status: 200 })
    }
    if (url.includes("/api/annotations")) {
      this.posts++
      if (this.expireNextSubmit) {
        this.expireNextSubmit = false
        return new Response(JSON.stringify({ error: "lease_expired", detail: "lease expired" }), { status: 410 })
      }
      const body = JSON.parse(String(init?.body)) as SubmitBody
      if (body.best === body.worst) {
        return new Response(JSON.stringify({ error: "invalid_pick", detail: "same" }), { status: 400 })
      }
      this.submissions.push(body)
      this.tasks.shift()
      return new Response(JSON.stringify({ status: "ok", duplicate: false }), { status: 200 })
    }
    if (url.includes("/api/progress")) {
      return new Response(
        JSON.stringify({
          tuples_total: 10,
          fully_annotated: this.submissions.length,
          partially_annotated: 0,
          per_annotator: { tester: this.submissions.length },
        }),
        { status: 200 },
      )
    }
    return new Response("not found", { status: 404 })
  }
}

async function flush(): Promise<void> {
  for (let i = 0; i < 20; i++) await new Promise((r) => setTimeout(r, 0))
}

function clickButton(root: HTMLElement, slot: number, role: string): void {
  const btn = root.querySelector(`button[data-role="${role}"][data-slot="${slot}"]`) as HTMLElement
  expect(btn).not.toBeNull()
  btn.click()
}

let root: HTMLElement

beforeEach(() => {
  document.body.innerHTML = `<div id="app"></div>`
  root = document.getElementById("app") as HTMLElement
})

describe("app flow", () => {
  it("renders four sentences when work is available", async () => {
    const server = new FakeServer([makeTask(0)])
    const app = new App(root, { base: "", fetchFn: server.fetchFn }, "tester")
    await app.start()
    await flush()
    expect(root.querySelectorAll("li.slot").length).toBe(4)
  })

  it("shows the terminal screen when no work remains", async () => {
    const server = new FakeServer([])
    const app = new App(root, { base: "", fetchFn: server.fetchFn }, "tester")
    await app.start()
    await flush()
    expect(root.querySelector("#done")).not.toBeNull()
  })

  it("shows a retry banner on network failure and recovers", async () => {
    const server = new FakeServer([makeTask(0)])
    server.failNextFetch = true
    const app = new App(root, { base: "", fetchFn: server.fetchFn }, "tester")
    await app.start()
    await flush()
    expect(root.querySelector("#retry-btn")).not.toBeNull()
    ;(root.querySelector("#retry-btn") as HTMLElement).click()
    await flush()
    expect(root.querySelectorAll("li.slot").length).toBe(4)
  })

  it("submits and advances to the next task", async () => {
    const server = new FakeServer([makeTask(0), makeTask(1)])
    const app = new App(root, { base: "", fetchFn: server.fetchFn }, "tester")
    await app.start()
    await flush()
    clickButton(root, 0, "best")
    clickButton(root, 2, "worst")
    ;(root.querySelector("#submit") as HTMLElement).click()
    await flush()
    expect(server.submissions.length).toBe(1)
    expect(server.submissions[0].best).not.toBe(server.submissions[0].worst)
    expect(root.querySelectorAll("li.slot").length).toBe(4) // next task on screen
  })

  it("blocks best=worst and disables submit", async () => {
    const server = new FakeServer([makeTask(0)])
    const app = new App(root, { base: "", fetchFn: server.fetchFn }, "tester")
    await app.start()
    await flush()
    clickButton(root, 1, "best")
    clickButton(root, 1, "worst")
    expect(root.querySelector("#message")).not.toBeNull()
    const submit = root.querySelector("#submit") as HTMLButtonElement
    expect(submit.hasAttribute("disabled")).toBe(true)
    submit.click()
    await flush()
    expect(server.posts).toBe(0)
  })

  it("double-click produces a single submission", async () => {
    const server = new FakeServer([makeTask(0)])
    let release: () => void = () => {}
    const gate = new Promise<void>((r) => (release = r))
    const slowFetch = async (input: RequestInfo | URL, init?: RequestInit) => {
      if (String(input).includes("/api/annotations")) await gate
      return server.fetchFn(input, init)
    }
    const app = new App(root, { base: "", fetchFn: slowFetch }, "tester")
    await app.start()
    await flush()
    clickButton(root, 0, "best")
    clickButton(root, 3, "worst")
    const p1 = app.handleSubmit()
    const p2 = app.handleSubmit() // second click while in flight
    release()
    await Promise.all([p1, p2])
    await flush()
    expect(server.posts).toBe(1)
  })

  it("refetches the task when the lease expired", async () => {
    const server = new FakeServer([makeTask(0)])
    server.expireNextSubmit = true
    const app = new App(root, { base: "", fetchFn: server.fetchFn }, "tester")
    await app.start()
    await flush()
    clickButton(root, 0, "best")
    clickButton(root, 1, "worst")
    ;(root.querySelector("#submit") as HTMLElement).click()
    await flush()
    expect(server.submissions.length).toBe(0)
    expect(root.querySelectorAll("li.slot").length).toBe(4) // task back on screen
    expect(root.textContent).toContain("lease expired")
  })

  it("keyboard and mouse paths produce identical payloads", async () => {
    // mouse run
    const serverA = new FakeServer([makeTask(0)])
    const appA = new App(root, { base: "", fetchFn: serverA.fetchFn }, "tester")
    await appA.start()
    await flush()
    clickButton(root, 2, "best")
    clickButton(root, 0, "worst")
    ;(root.querySelector("#submit") as HTMLElement).click()
    await flush()

    // keyboard run on a fresh DOM and identical task
    document.body.innerHTML = `<div id="app"></div>`
    root = document.getElementById("app") as HTMLElement
    const serverB = new FakeServer([makeTask(0)])
    const appB = new App(root, { base: "", fetchFn: serverB.fetchFn }, "tester")
    await appB.start()
    await flush()
    const press = (key: string) =>
      document.dispatchEvent(new KeyboardEvent("keydown", { key, bubbles: true, cancelable: true }))
    press("b")
    press("3") // slot index 2
    press("w")
    press("1") // slot index 0
    press("Enter")
    await flush()

    expect(serverB.submissions).toEqual(serverA.submissions)
  })
})

describe("keyboard mapping", () => {
  it("maps digits, roles, and submit", () => {
    expect(keyToAction("1")).toEqual({ type: "slot", slot: 0 })
    expect(keyToAction("4")).toEqual({ type: "slot", slot: 3 })
    expect(keyToAction("b")).toEqual({ type: "role", role: "best" })
    expect(keyToAction("W")).toEqual({ type: "role", role: "worst" })
    expect(keyToAction("Enter")).toEqual({ type: "submit" })
    expect(keyToAction("x")).toBeNull()
    expect(keyToAction("5")).toBeNull()
  })
})
