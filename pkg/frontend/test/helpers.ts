// Shared jsdom page scaffolding for widget tests.

export function clearPage(): void {
  document.head.querySelectorAll("meta").forEach((meta) => meta.remove());
  document.body.textContent = "";
  localStorage.clear();
}

export function addMeta(name: string, content: string): void {
  const meta = document.createElement("meta");
  meta.setAttribute("name", name);
  meta.setAttribute("content", content);
  document.head.appendChild(meta);
}

export function addContainer(attrs: Record<string, string> = {}): HTMLElement {
  const container = document.createElement("div");
  container.id = "scholrec";
  for (const [key, value] of Object.entries(attrs)) {
    container.setAttribute(key, value);
  }
  document.body.appendChild(container);
  return container;
}

export function articlePage(serviceUrl: string, repositoryId = "wr"): HTMLElement {
  clearPage();
  addMeta("citation_title", "hypoxia and arterial oxygenation");
  addMeta("citation_author", "R. Naeije");
  addMeta("citation_publication_date", "2015/03/01");
  return addContainer({
    "data-service-url": serviceUrl,
    "data-repository-id": repositoryId,
    "data-limit": "5",
  });
}
