// DOM rendering for the two-tab suggestion panel. Everything user-visible
// is created via createElement/textContent only: titles coming from the
// corpus are untrusted and must never reach innerHTML.

import type { RecommendationItem, RecommendResponse, ScopeName } from "./types";

export interface ScopeResult {
  scope: ScopeName;
  response?: RecommendResponse;
  failed?: boolean;
}

export interface PanelHandlers {
  onItemClick(item: RecommendationItem, response: RecommendResponse): void;
  onFeedback(item: RecommendationItem, response: RecommendResponse): void;
}

const TAB_LABELS: Record<ScopeName, string> = {
  global: "Suggested articles",
  repository: "Suggested articles in this repository",
};

function itemHref(item: RecommendationItem): string {
  return item.doi ? `https://doi.org/${encodeURIComponent(item.doi)}` : "#";
}

function renderItem(
  doc: Document,
  item: RecommendationItem,
  response: RecommendResponse,
  handlers: PanelHandlers
): HTMLLIElement {
  const li = doc.createElement("li");
  li.className = "scholrec-item";
  li.setAttribute("data-doc-id", item.id);

  const link = doc.createElement("a");
  link.className = "scholrec-title";
  link.href = itemHref(item);
  link.textContent = item.title;
  link.addEventListener("click", () => {
    // fire-and-forget: navigation must never wait on the event POST
    handlers.onItemClick(item, response);
  });
  li.appendChild(link);

  const byline = doc.createElement("div");
  byline.className = "scholrec-byline";
  const parts = [item.authors.join(", ")];
  if (item.year !== null && item.year !== undefined) parts.push(String(item.year));
  byline.textContent = parts.filter(Boolean).join(" · ");
  li.appendChild(byline);

  const source = doc.createElement("div");
  source.className = "scholrec-source";
  source.textContent = `Provided by: ${item.repository_id}`;
  li.appendChild(source);

  const flag = doc.createElement("button");
  flag.type = "button";
  flag.className = "scholrec-flag";
  flag.textContent = "Not relevant";
  flag.addEventListener("click", () => {
    li.remove(); // optimistic: the report is queued, the item is gone now
    handlers.onFeedback(item, response);
  });
  li.appendChild(flag);

  return li;
}

function renderScopeSection(
  doc: Document,
  result: ScopeResult,
  handlers: PanelHandlers
): HTMLElement {
  const section = doc.createElement("section");
  section.className = "scholrec-tabpanel";
  section.setAttribute("data-scope", result.scope);

  if (result.failed || !result.response) {
    const note = doc.createElement("p");
    note.className = "scholrec-unavailable";
    note.textContent = "Suggestions are unavailable right now.";
    section.appendChild(note);
    return section;
  }
  if (!result.response.items.length) {
    const empty = doc.createElement("p");
    empty.className = "scholrec-empty";
    empty.textContent = "No suggestions for this article yet.";
    section.appendChild(empty);
    return section;
  }
  const list = doc.createElement("ul");
  list.className = "scholrec-items";
  for (const item of result.response.items) {
    list.appendChild(renderItem(doc, item, result.response, handlers));
  }
  section.appendChild(list);
  return section;
}

/** Render the full two-tab panel into the container (replacing content). */
export function renderPanel(
  container: HTMLElement,
  results: ScopeResult[],
  handlers: PanelHandlers
): void {
  const doc = container.ownerDocument;
  container.textContent = "";

  const panel = doc.createElement("div");
  panel.className = "scholrec-panel";

  const tabBar = doc.createElement("div");
  tabBar.className = "scholrec-tabs";
  panel.appendChild(tabBar);

  const sections: HTMLElement[] = [];
  results.forEach((result, index) => {
    const button = doc.createElement("button");
    button.type = "button";
    button.className = "scholrec-tab";
    button.textContent = TAB_LABELS[result.scope];
    button.setAttribute("data-scope", result.scope);
    button.setAttribute("aria-selected", index === 0 ? "true" : "false");
    const section = renderScopeSection(doc, result, handlers);
    section.hidden = index !== 0;
    button.addEventListener("click", () => {
      sections.forEach((other, otherIndex) => {
        other.hidden = otherIndex !== index;
      });
      tabBar.querySelectorAll(".scholrec-tab").forEach((tab, tabIndex) => {
        tab.setAttribute("aria-selected", tabIndex === index ? "true" : "false");
      });
    });
    tabBar.appendChild(button);
    sections.push(section);
  });
  sections.forEach((section) => panel.appendChild(section));

  if (results.some((result) => result.failed)) {
    const strip = doc.createElement("div");
    strip.className = "scholrec-error";
    strip.textContent = "Some suggestions could not be loaded.";
    panel.appendChild(strip);
  }

  const powered = doc.createElement("div");
  powered.className = "scholrec-powered";
  powered.textContent = "Powered by scholrec";
  panel.appendChild(powered);

  container.appendChild(panel);
}

/** No usable page metadata: mount an inert panel and make no network call. */
export function renderDisabledPanel(container: HTMLElement): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  const panel = doc.createElement("div");
  panel.className = "scholrec-panel scholrec-disabled";
  const note = doc.createElement("p");
  note.textContent = "No article metadata found on this page.";
  panel.appendChild(note);
  container.appendChild(panel);
}
