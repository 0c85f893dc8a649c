// Response shapes of the search service API.

export type SearchMethod = "hybrid" | "semantic" | "spatial" | "bm25";

export type Hit = {
  doc_id: string;
  rank: number;
  display_name: string;
  name_rus: string;
  name_tat: string;
  latitude: number | null;
  longitude: number | null;
  distance_m: number | null;
  sem_score: number | null;
  sem_norm: number | null;
  geo_score: number | null;
  geo_norm: number | null;
  combined: number;
  snippet: string;
};

export type SearchResponse = {
  query: {
    text: string;
    lat: number | null;
    lon: number | null;
    radius_m: number;
    alpha: number;
    k: number;
    method: SearchMethod;
  };
  hits: Hit[];
  diagnostics: string[];
};

export type AskResponse = {
  answer: string;
  answer_start: number;
  category: string | null;
  doc_id: string | null;
  context: string;
  hit: Hit | null;
  diagnostics: string[];
};

export type DocResponse = {
  record: Record<string, unknown>;
  retrieval_context: string;
  qa_context: string;
};

export type ExplorerState = {
  query: string;
  lat: number | null;
  lon: number | null;
  radiusM: number;
  alpha: number;
  k: number;
  method: SearchMethod;
  askMode: boolean;
};

export const initialState = (): ExplorerState => ({
  query: "",
  lat: null,
  lon: null,
  radiusM: 50_000,
  alpha: 0.1,
  k: 5,
  method: "hybrid",
  askMode: false,
});
