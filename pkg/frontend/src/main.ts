import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { renderApp } from "./render.js";
import { emptyDraft } from "./state.js";
import type { IssuerRuleDraft } from "./types.js";

// Same-origin by default; ?api=http://host:port points elsewhere.
const apiBase = new URLSearchParams(location.search).get("api") ?? "";
const root = document.querySelector("#app");
if (root === null) {
  throw new Error("missing #app mount point");
}

const controller = new Controller(new ApiClient(apiBase), () => render());

function render(): void {
  root!.innerHTML = renderApp(controller.state);
  bind();
}

function draftsWithEdit(index: number, field: keyof IssuerRuleDraft, value: string) {
  return controller.state.drafts.map((draft, i) =>
    i === index ? { ...draft, [field]: value } : draft,
  );
}

function bind(): void {
  const on = (selector: string, event: string, handler: (el: Element) => void) => {
    root!.querySelectorAll(selector).forEach((el) => {
      el.addEventListener(event, () => handler(el));
    });
  };

  on("#network", "change", (el) => {
    controller.dispatch({ type: "networkSelected", name: (el as HTMLSelectElement).value });
  });
  on("#query-name", "change", (el) => {
    const value = (el as HTMLSelectElement).value;
    if (value === "__custom__") {
      controller.dispatch({ type: "customQuerySelected" });
    } else {
      controller.dispatch({ type: "querySelected", name: value });
    }
  });
  on("#query-text", "change", (el) => {
    controller.dispatch({
      type: "customQueryEdited",
      text: (el as HTMLTextAreaElement).value,
    });
  });
  on("#alignment", "change", (el) => {
    controller.dispatch({
      type: "alignmentToggled",
      alignment: (el as HTMLInputElement).checked ? "on" : "off",
    });
  });
  on("#drafts [data-field]", "change", (el) => {
    const input = el as HTMLInputElement | HTMLSelectElement;
    const index = Number(input.dataset.index);
    const field = input.dataset.field as keyof IssuerRuleDraft;
    controller.dispatch({ type: "draftsEdited", drafts: draftsWithEdit(index, field, input.value) });
  });
  on("#add-draft", "click", () => {
    controller.dispatch({
      type: "draftsEdited",
      drafts: [...controller.state.drafts, emptyDraft()],
    });
  });
  on("[data-remove]", "click", (el) => {
    const index = Number((el as HTMLElement).dataset.remove);
    const drafts = controller.state.drafts.filter((_, i) => i !== index);
    controller.dispatch({
      type: "draftsEdited",
      drafts: drafts.length > 0 ? drafts : [emptyDraft()],
    });
  });
  on("#run", "click", () => {
    void controller.run();
  });
}

render();
void controller.loadCatalog().catch((err) => {
  root!.innerHTML = `<p class="error">Could not reach the query service: ${String(err)}</p>`;
});
