// Widget bootstrap: read the embed config from the container's data
// attributes, fetch both scopes once, render, and wire interactions.

import { ApiClient } from "./api";
import { extractPageMetadata } from "./metadata";
import { renderDisabledPanel, renderPanel, type ScopeResult } from "./panel";
import { userToken } from "./token";
import type { EmbedConfig, RecommendationItem, RecommendResponse } from "./types";

export const DEFAULT_CONTAINER_ID = "scholrec";
const MOUNTED_ATTR = "data-scholrec-mounted";

export interface MountResult {
  container: HTMLElement;
  disabled: boolean;
  alreadyMounted: boolean;
  fetches: number;
  results: ScopeResult[];
}

export function readEmbedConfig(container: HTMLElement): EmbedConfig {
  const serviceBaseUrl = container.getAttribute("data-service-url") || "";
  if (!/^https?:\/\//.test(serviceBaseUrl)) {
    throw new Error("data-service-url must be an absolute http(s) URL");
  }
  const repositoryId = container.getAttribute("data-repository-id") || "";
  if (!repositoryId) {
    throw new Error("data-repository-id is required");
  }
  let limit = parseInt(container.getAttribute("data-limit") || "5", 10);
  if (!Number.isFinite(limit)) limit = 5;
  limit = Math.min(50, Math.max(1, limit));
  return {
    serviceBaseUrl,
    repositoryId,
    limit,
    variant: container.getAttribute("data-variant") || undefined,
    containerId: container.id || DEFAULT_CONTAINER_ID,
  };
}

/**
 * Mount the panel into a container. Exactly two recommendation fetches per
 * mount (one per scope), no polling; remounting the same container is a
 * no-op so double script inclusion cannot duplicate the panel.
 */
export async function mountWidget(
  container: HTMLElement,
  doc: Document = container.ownerDocument
): Promise<MountResult> {
  if (container.getAttribute(MOUNTED_ATTR) === "true") {
    return {
      container,
      disabled: false,
      alreadyMounted: true,
      fetches: 0,
      results: [],
    };
  }
  container.setAttribute(MOUNTED_ATTR, "true");

  const config = readEmbedConfig(container);
  const reference = extractPageMetadata(doc, container);
  if (!reference) {
    renderDisabledPanel(container);
    return {
      container,
      disabled: true,
      alreadyMounted: false,
      fetches: 0,
      results: [],
    };
  }

  const token = userToken();
  const client = new ApiClient(config.serviceBaseUrl);
  const [globalOutcome, repositoryOutcome] = await Promise.allSettled([
    client.recommend(reference, "global", config.repositoryId, config.limit, token, config.variant),
    client.recommend(reference, "repository", config.repositoryId, config.limit, token, config.variant),
  ]);

  const results: ScopeResult[] = [
    globalOutcome.status === "fulfilled"
      ? { scope: "global", response: globalOutcome.value }
      : { scope: "global", failed: true },
    repositoryOutcome.status === "fulfilled"
      ? { scope: "repository", response: repositoryOutcome.value }
      : { scope: "repository", failed: true },
  ];

  const handlers = {
    onItemClick(item: RecommendationItem, response: RecommendResponse) {
      void client.sendEvent({
        user_hash: token,
        doc_id: item.id,
        kind: "click",
        source_doc_id: response.reference_key,
        variant: config.variant,
      });
    },
    onFeedback(item: RecommendationItem, response: RecommendResponse) {
      void client.sendFeedback(response.reference_key, item.id, token);
    },
  };
  renderPanel(container, results, handlers);
  return {
    container,
    disabled: false,
    alreadyMounted: false,
    fetches: 2,
    results,
  };
}

/** Find the default container and mount; used by the script-tag embed. */
export function autoMount(doc: Document): Promise<MountResult> | null {
  const container = doc.getElementById(DEFAULT_CONTAINER_ID);
  if (!(container instanceof doc.defaultView!.HTMLElement)) return null;
  return mountWidget(container, doc);
}
