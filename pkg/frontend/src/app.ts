// Application wiring: search controls, URL-backed state, and view routing.
// Concurrent searches resolve last-write-wins via a request sequence number,
// so a slow stale response can never overwrite a newer view.

import { ApiClient, ApiError } from "./api.js";
import {
  PAGE_SIZE,
  SearchViewState,
  emptyState,
  stateFromQueryString,
  stateToQueryString,
} from "./state.js";
import {
  renderDetail,
  renderErrorBanner,
  renderHits,
  renderNotFound,
} from "./render.js";

export interface App {
  /** Re-read the URL and render; resolves when the view is settled. */
  refresh(): Promise<void>;
}

export function createApp(root: HTMLElement, api: ApiClient, win: Window): App {
  const doc = root.ownerDocument;
  let state: SearchViewState = emptyState();
  let searchSeq = 0;
  let detailSeq = 0;

  root.textContent = "";
  const form = doc.createElement("form");
  form.className = "search-form";
  const queryInput = doc.createElement("input");
  queryInput.type = "search";
  queryInput.name = "q";
  queryInput.placeholder = "Search ad transcripts";
  queryInput.className = "query-input";
  const yearSelect = doc.createElement("select");
  yearSelect.className = "year-select";
  const candidateSelect = doc.createElement("select");
  candidateSelect.className = "candidate-select";
  const submit = doc.createElement("button");
  submit.type = "submit";
  submit.textContent = "Search";
  form.append(queryInput, yearSelect, candidateSelect, submit);

  const resultsView = doc.createElement("div");
  resultsView.className = "results-view";
  const detailView = doc.createElement("div");
  detailView.className = "detail-view";
  root.append(form, resultsView, detailView);

  function option(value: string, label: string): HTMLOptionElement {
    const node = doc.createElement("option");
    node.value = value;
    node.textContent = label;
    return node;
  }

  async function loadYearOptions(): Promise<void> {
    const years = await api.years();
    yearSelect.textContent = "";
    yearSelect.appendChild(option("", "All years"));
    for (const year of years) yearSelect.appendChild(option(String(year), String(year)));
  }

  async function loadCandidateOptions(): Promise<void> {
    const candidates = await api.candidates(state.year);
    candidateSelect.textContent = "";
    candidateSelect.appendChild(option("", "All candidates"));
    for (const name of candidates) candidateSelect.appendChild(option(name, name));
    candidateSelect.value = state.candidate ?? "";
  }

  function pushState(): void {
    const url = stateToQueryString(state) || win.location.pathname;
    win.history.pushState(null, "", url);
  }

  function syncControls(): void {
    queryInput.value = state.query;
    yearSelect.value = state.year != null ? String(state.year) : "";
    candidateSelect.value = state.candidate ?? "";
  }

  async function runSearch(): Promise<void> {
    const mine = ++searchSeq;
    if (!state.query.trim()) {
      resultsView.textContent = "";
      return;
    }
    try {
      const hits = await api.search(state.query, {
        year: state.year,
        candidate: state.candidate,
      });
      if (mine !== searchSeq) return; // a newer search superseded this one
      renderHits(
        doc,
        resultsView,
        hits,
        state.page,
        PAGE_SIZE,
        (adId) => {
          state = { ...state, adId };
          pushState();
          void showDetail();
        },
        (page) => {
          state = { ...state, page };
          pushState();
          void runSearch();
        },
      );
    } catch (err) {
      if (mine !== searchSeq) return;
      resultsView.textContent = "";
      renderErrorBanner(doc, resultsView, describeError(err), () => void runSearch());
    }
  }

  async function showDetail(): Promise<void> {
    const adId = state.adId;
    const mine = ++detailSeq;
    if (!adId) {
      detailView.textContent = "";
      detailView.hidden = true;
      resultsView.hidden = false;
      form.hidden = false;
      return;
    }
    form.hidden = true;
    resultsView.hidden = true;
    detailView.hidden = false;
    try {
      const detail = await api.ad(adId);
      if (mine !== detailSeq) return;
      renderDetail(doc, detailView, detail, () => {
        state = { ...state, adId: null };
        pushState();
        void refresh();
      });
    } catch (err) {
      if (mine !== detailSeq) return;
      if (err instanceof ApiError && err.status === 404) {
        renderNotFound(doc, detailView, adId);
      } else {
        renderErrorBanner(doc, detailView, describeError(err), () => void showDetail());
      }
    }
  }

  function describeError(err: unknown): string {
    if (err instanceof ApiError) {
      return err.status === 0
        ? "The search service is unreachable."
        : `The search service returned an error (${err.status}).`;
    }
    return "Unexpected error.";
  }

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    state = {
      ...state,
      query: queryInput.value,
      year: yearSelect.value ? Number(yearSelect.value) : null,
      candidate: candidateSelect.value || null,
      page: 0,
      adId: null,
    };
    pushState();
    void refresh();
  });

  yearSelect.addEventListener("change", () => {
    state = {
      ...state,
      year: yearSelect.value ? Number(yearSelect.value) : null,
      candidate: null,
      page: 0,
    };
    void loadCandidateOptions();
  });

  async function refresh(): Promise<void> {
    state = stateFromQueryString(win.location.search);
    syncControls();
    await loadCandidateOptions().catch(() => {
      /* dropdown refresh is non-fatal; search still works */
    });
    await Promise.all([showDetail(), runSearch()]);
  }

  win.addEventListener("popstate", () => void refresh());

  const app: App = { refresh };
  void loadYearOptions()
    .then(() => refresh())
    .catch(() => {
      renderErrorBanner(doc, resultsView, "The search service is unreachable.", () => {
        void loadYearOptions().then(() => refresh());
      });
    });
  return app;
}
