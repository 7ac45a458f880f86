import { App } from "./app.js"

function annotatorFromUrl(): string | null {
  const params = new URLSearchParams(window.location.search)
  const id = params.get("annotator")
  return id && id.trim() ? id.trim() : null
}

function boot(): void {
  const root = document.getElementById("app")
  if (!root) throw new Error("missing #app container")
  const annotator = annotatorFromUrl()
  if (!annotator) {
    root.innerHTML = `
      <header><h1>Sentence importance annotation</h1></header>
      <form id="login">
        <label>Annotator id <input id="annotator-input" autofocus /></label>
        <button type="submit">Start</button>
      </form>`
    const form = document.getElementById("login") as HTMLFormElement
    form.addEventListener("submit", (ev) => {
      ev.preventDefault()
      const input = document.getElementById("annotator-input") as HTMLInputElement
      const id = input.value.trim()
      if (id) {
        const url = new URL(window.location.href)
        url.searchParams.set("annotator", id)
        window.location.href = url.toString()
      }
    })
    return
  }
  const app = new App(root, { base: "", fetchFn: window.fetch.bind(window) }, annotator)
  void app.start()
}

boot()
