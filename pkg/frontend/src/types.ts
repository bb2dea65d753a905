// Wire types shared with the recommendation service (/v1 endpoints).

export interface ReferenceDocument {
  id?: string;
  doi?: string;
  title?: string;
  authors?: string[];
  abstract?: string;
  year?: number;
}

export interface RecommendationItem {
  id: string;
  title: string;
  authors: string[];
  year: number | null;
  repository_id: string;
  score: number;
  doi?: string;
}

export interface RecommendResponse {
  items: RecommendationItem[];
  reference_resolved: boolean;
  reference_key: string;
  index_version: number;
  request_id: string;
}

export interface EmbedConfig {
  serviceBaseUrl: string;
  repositoryId: string;
  limit: number;
  variant?: string;
  containerId: string;
}

export type ScopeName = "global" | "repository";
