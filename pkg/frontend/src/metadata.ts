// Read the visited article's metadata from Highwire-style meta tags, the
// convention scholarly repositories already emit for indexers.

import type { ReferenceDocument } from "./types";

function metaContents(doc: Document, name: string): string[] {
  const nodes = doc.querySelectorAll<HTMLMetaElement>(`meta[name="${name}"]`);
  const values: string[] = [];
  nodes.forEach((node) => {
    const content = (node.getAttribute("content") || "").trim();
    if (content) values.push(content);
  });
  return values;
}

function firstMeta(doc: Document, name: string): string | undefined {
  return metaContents(doc, name)[0];
}

function parseYear(raw: string | undefined): number | undefined {
  if (!raw) return undefined;
  const match = raw.match(/\d{4}/);
  return match ? parseInt(match[0], 10) : undefined;
}

/**
 * Extract whatever subset of the reference document the page exposes.
 * Returns null when neither meta tags nor an explicit container id yield
 * anything; the panel then renders disabled and makes no network call.
 */
export function extractPageMetadata(
  doc: Document,
  container?: Element | null
): ReferenceDocument | null {
  const ref: ReferenceDocument = {};

  const explicitId = container?.getAttribute("data-document-id") || undefined;
  if (explicitId) ref.id = explicitId;

  const title = firstMeta(doc, "citation_title");
  if (title) ref.title = title;

  const authors = metaContents(doc, "citation_author");
  if (authors.length) ref.authors = authors;

  const abstract = firstMeta(doc, "citation_abstract");
  if (abstract) ref.abstract = abstract;

  const year = parseYear(firstMeta(doc, "citation_publication_date"));
  if (year !== undefined) ref.year = year;

  const doi = firstMeta(doc, "citation_doi");
  if (doi) ref.doi = doi;

  return Object.keys(ref).length ? ref : null;
}
