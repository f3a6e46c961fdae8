// DOM builders. No framework: the service is read-only and the views are
// small, so direct element construction keeps the client dependency-free.

import type { AdDetail, SearchHit } from "./api.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text != null) node.textContent = text;
  return node;
}

/** Snippet with the matched span wrapped in <mark>. */
function snippetNode(doc: Document, hit: SearchHit): HTMLElement {
  const container = el(doc, "span", "snippet");
  const [start, end] = hit.span;
  container.appendChild(doc.createTextNode(hit.snippet.slice(0, start)));
  const mark = el(doc, "mark", "match-span", hit.snippet.slice(start, end));
  container.appendChild(mark);
  container.appendChild(doc.createTextNode(hit.snippet.slice(end)));
  return container;
}

export function renderHits(
  doc: Document,
  container: HTMLElement,
  hits: SearchHit[],
  page: number,
  pageSize: number,
  onSelect: (adId: string) => void,
  onPage: (page: number) => void,
): void {
  container.textContent = "";
  if (hits.length === 0) {
    container.appendChild(el(doc, "p", "no-results", "No matching ads."));
    return;
  }
  const list = el(doc, "ol", "hit-list");
  // Client-side paging is a pure window over the server's ordering.
  const start = page * pageSize;
  for (const hit of hits.slice(start, start + pageSize)) {
    const item = el(doc, "li", "hit");
    item.dataset.adId = hit.ad_id;

    const header = el(doc, "div", "hit-header");
    const link = el(doc, "a", "hit-title", `${hit.candidate} (${hit.year})`);
    link.href = `?ad=${encodeURIComponent(hit.ad_id)}`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onSelect(hit.ad_id);
    });
    header.appendChild(link);
    if (hit.match_kind === "exact") {
      header.appendChild(el(doc, "span", "badge badge-exact", "exact"));
    }
    item.appendChild(header);
    item.appendChild(snippetNode(doc, hit));
    list.appendChild(item);
  }
  container.appendChild(list);

  const pages = Math.ceil(hits.length / pageSize);
  if (pages > 1) {
    const nav = el(doc, "nav", "pager");
    const prev = el(doc, "button", "pager-prev", "Previous");
    prev.disabled = page <= 0;
    prev.addEventListener("click", () => onPage(page - 1));
    const label = el(doc, "span", "pager-label", `Page ${page + 1} of ${pages}`);
    const next = el(doc, "button", "pager-next", "Next");
    next.disabled = page >= pages - 1;
    next.addEventListener("click", () => onPage(page + 1));
    nav.append(prev, label, next);
    container.appendChild(nav);
  }
}

export function renderErrorBanner(
  doc: Document,
  container: HTMLElement,
  message: string,
  onRetry: () => void,
): void {
  container.textContent = "";
  const banner = el(doc, "div", "error-banner");
  banner.appendChild(el(doc, "span", "error-message", message));
  const retry = el(doc, "button", "retry", "Retry");
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  container.appendChild(banner);
}

export function renderNotFound(doc: Document, container: HTMLElement, adId: string): void {
  container.textContent = "";
  const box = el(doc, "div", "not-found");
  box.appendChild(el(doc, "h2", undefined, "Ad not found"));
  box.appendChild(el(doc, "p", undefined, `No ad with id ${adId}.`));
  container.appendChild(box);
}

function formatTime(seconds: number): string {
  return `${seconds.toFixed(2)}s`;
}

export function renderDetail(
  doc: Document,
  container: HTMLElement,
  detail: AdDetail,
  onBack: () => void,
): void {
  container.textContent = "";
  const view = el(doc, "article", "ad-detail");

  const back = el(doc, "button", "back", "Back to results");
  back.addEventListener("click", onBack);
  view.appendChild(back);

  const heading = detail.title
    ? `${detail.title} — ${detail.candidate} (${detail.year})`
    : `${detail.candidate} (${detail.year})`;
  view.appendChild(el(doc, "h2", "ad-heading", heading));

  const meta = el(doc, "dl", "ad-meta");
  const rows: Array<[string, string]> = [
    ["Ad id", detail.ad_id],
    ["Party", detail.party],
    ["Duration", formatTime(detail.duration_s)],
    ["Kind", detail.attack_ad ? "attack ad" : "advocacy ad"],
  ];
  for (const [key, value] of rows) {
    meta.appendChild(el(doc, "dt", undefined, key));
    meta.appendChild(el(doc, "dd", undefined, value));
  }
  view.appendChild(meta);

  if (detail.video_path) {
    const link = el(doc, "a", "video-link", "Watch video");
    link.href = detail.video_path;
    link.target = "_blank";
    link.rel = "noopener";
    view.appendChild(link);
  }

  const summarySection = el(doc, "section", "summary");
  summarySection.appendChild(el(doc, "h3", undefined, "Summary"));
  summarySection.appendChild(
    el(doc, "p", "summary-text", detail.summary ?? "unavailable"),
  );
  view.appendChild(summarySection);

  const storyboard = el(doc, "section", "storyboard");
  storyboard.appendChild(el(doc, "h3", undefined, "Storyboard"));
  const strip = el(doc, "div", "storyboard-strip");
  for (const frame of detail.frames) {
    const cell = el(doc, "figure", "storyboard-frame");
    const img = el(doc, "img", "thumb");
    img.src = frame.image_url;
    img.alt = `frame at ${formatTime(frame.timestamp_s)}`;
    img.loading = "lazy";
    cell.appendChild(img);
    cell.appendChild(el(doc, "figcaption", undefined, formatTime(frame.timestamp_s)));
    strip.appendChild(cell);
  }
  storyboard.appendChild(strip);
  view.appendChild(storyboard);

  const transcript = el(doc, "section", "transcript");
  transcript.appendChild(el(doc, "h3", undefined, "Transcript"));
  const table = el(doc, "table", "transcript-table");
  const body = el(doc, "tbody");
  for (const segment of detail.transcript.segments) {
    const row = el(doc, "tr", "transcript-row");
    row.appendChild(el(doc, "td", "t-start", formatTime(segment.start_s)));
    row.appendChild(el(doc, "td", "t-end", formatTime(segment.end_s)));
    row.appendChild(el(doc, "td", "t-text", segment.text));
    body.appendChild(row);
  }
  table.appendChild(body);
  transcript.appendChild(table);
  view.appendChild(transcript);

  container.appendChild(view);
}
