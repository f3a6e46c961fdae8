// View state lives entirely in the URL query string so every view is
// deep-linkable and back/forward restore it exactly.

export interface SearchViewState {
  query: string;
  year: number | null;
  candidate: string | null;
  page: number;
  adId: string | null;
}

export const PAGE_SIZE = 20;

export function emptyState(): SearchViewState {
  return { query: "", year: null, candidate: null, page: 0, adId: null };
}

export function stateFromQueryString(search: string): SearchViewState {
  const params = new URLSearchParams(search);
  const yearRaw = params.get("year");
  const pageRaw = params.get("page");
  const year = yearRaw != null && /^\d+$/.test(yearRaw) ? Number(yearRaw) : null;
  const page = pageRaw != null && /^\d+$/.test(pageRaw) ? Number(pageRaw) : 0;
  return {
    query: params.get("q") ?? "",
    year,
    candidate: params.get("candidate"),
    page,
    adId: params.get("ad"),
  };
}

export function stateToQueryString(state: SearchViewState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  if (state.year != null) params.set("year", String(state.year));
  if (state.candidate) params.set("candidate", state.candidate);
  if (state.page > 0) params.set("page", String(state.page));
  if (state.adId) params.set("ad", state.adId);
  const encoded = params.toString();
  return encoded ? `?${encoded}` : "";
}
