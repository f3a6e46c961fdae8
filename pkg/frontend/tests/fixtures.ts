// Stubbed API: fixture data plus a fetch implementation the tests install.

import type { AdDetail, SearchHit, TranscriptSegment } from "../src/api.js";

const HOPE_ROWS: Array<[number, number, string]> = [
  [0, 4.4, "I was born in a little town called Hope, Arkansas, three months after my father died."],
  [5.36, 8.58, "I remember that old, too-story house where I lived with my grandparents."],
  [9.06, 10.28, "They had very limited incomes."],
  [11.88, 17.68, "It was in 1963 that I went to Washington and met President Kennedy at the Boys' Nation program."],
  [18.62, 23.24, "And I remember just thinking what an incredible country this was,"],
  [23.24, 26.0, "that somebody like me, you know, had no money or anything,"],
  [26.2, 28.2, "would be given the opportunity to meet the president."],
  [28.2, 31.16, "And that's when I decided that I could really do public service"],
  [31.16, 32.64, "because I cared so much about people."],
  [33.18, 36.56, "I worked my way through law school with part-time jobs, anything I could find."],
  [37.4, 40.46, "And after I graduated, I really didn't care about making a lot of money."],
  [40.54, 42.68, "I just wanted to go home and see if I could make a difference."],
  [43.72, 48.22, "We've worked hard in education and health care to create jobs,"],
  [48.36, 50.16, "and we've made real progress."],
  [50.44, 53.06, "Now it's exhilarating to me to think that as president,"],
  [53.2, 55.76, "I could help to change all our people's lives for the better"],
  [55.76, 58.16, "and bring hope back to the American dream."],
];

export const HOPE_SEGMENTS: TranscriptSegment[] = HOPE_ROWS.map(([start_s, end_s, text]) => ({
  start_s,
  end_s,
  text,
}));

export const HOPE_DETAIL: AdDetail = {
  ad_id: "P-1291-61062",
  year: 1992,
  candidate: "Bill Clinton",
  party: "Democratic",
  title: "Hope, Arkansas",
  attack_ad: false,
  duration_s: 58.16,
  video_path: "1992/P-1291-61062.mp4",
  transcript: {
    segments: HOPE_SEGMENTS,
    full_text: HOPE_SEGMENTS.map((s) => s.text).join(" "),
  },
  summary:
    "Bill Clinton recounts his Hope, Arkansas upbringing and pledges to bring hope back to the American dream.",
  frames: [
    { timestamp_s: 1.5, origin: "regular_grid", image_url: "/media/1992/P-1291-61062.frames/f0.jpg" },
    { timestamp_s: 2.2, origin: "segment_mid", image_url: "/media/1992/P-1291-61062.frames/f1.jpg" },
    { timestamp_s: 6.97, origin: "segment_mid", image_url: "/media/1992/P-1291-61062.frames/f2.jpg" },
  ],
};

export const NO_SUMMARY_DETAIL: AdDetail = {
  ad_id: "P-4444-00001",
  year: 2008,
  candidate: "Barack Obama",
  party: "Democratic",
  title: null,
  attack_ad: false,
  duration_s: 30,
  video_path: null,
  transcript: { segments: [], full_text: "" },
  summary: null,
  frames: [],
};

// Deliberately NOT sorted by score within a tier: the client must render
// server order verbatim, never re-rank.
export const SEARCH_HITS: SearchHit[] = [
  {
    ad_id: "P-1291-61062",
    score: 1.0,
    match_kind: "exact",
    snippet: "…a little town called Hope, Arkansas, three months…",
    span: [22, 37],
    year: 1992,
    candidate: "Bill Clinton",
  },
  {
    ad_id: "P-4444-00001",
    score: 1.0,
    match_kind: "exact",
    snippet: "Hope and change for a new generation.",
    span: [0, 4],
    year: 2008,
    candidate: "Barack Obama",
  },
  {
    ad_id: "F-010-1234",
    score: 0.41,
    match_kind: "fuzzy",
    snippet: "hoping for better days ahead",
    span: [0, 6],
    year: 1972,
    candidate: "Al North",
  },
  {
    ad_id: "F-011-5678",
    score: 0.88,
    match_kind: "fuzzy",
    snippet: "a hopeful message for voters",
    span: [2, 9],
    year: 1984,
    candidate: "Bo South",
  },
];

export const YEARS = [1952, 1972, 1984, 1992, 2008];
export const CANDIDATES = ["clinton", "north", "obama", "south"];

export interface StubOptions {
  hits?: SearchHit[];
  failSearch?: boolean;
  failAll?: boolean;
  /** Delay (ms) applied per search call, by call index. */
  searchDelays?: number[];
  hitsByCall?: SearchHit[][];
}

export interface StubStats {
  searchCalls: Array<{ q: string; year: string | null; candidate: string | null }>;
}

export function installFetchStub(options: StubOptions = {}): StubStats {
  const stats: StubStats = { searchCalls: [] };
  const delay = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

  const fetchImpl = async (input: RequestInfo | URL): Promise<Response> => {
    const url = new URL(String(input), "http://localhost");
    if (options.failAll) {
      throw new TypeError("network down");
    }
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), {
        status,
        headers: { "content-type": "application/json" },
      });

    if (url.pathname === "/api/years") {
      return json({ years: YEARS });
    }
    if (url.pathname === "/api/candidates") {
      const year = url.searchParams.get("year");
      const filtered =
        year === "1992" ? ["clinton"] : year === "2008" ? ["obama"] : CANDIDATES;
      return json({ candidates: filtered });
    }
    if (url.pathname === "/api/search") {
      const call = stats.searchCalls.length;
      stats.searchCalls.push({
        q: url.searchParams.get("q") ?? "",
        year: url.searchParams.get("year"),
        candidate: url.searchParams.get("candidate"),
      });
      if (options.failSearch) {
        return json({ error: "boom" }, 500);
      }
      const wait = options.searchDelays?.[call] ?? 0;
      if (wait > 0) await delay(wait);
      const hits = options.hitsByCall?.[call] ?? options.hits ?? SEARCH_HITS;
      return json({ hits });
    }
    const adMatch = url.pathname.match(/^\/api\/ads\/(.+)$/);
    if (adMatch) {
      const adId = decodeURIComponent(adMatch[1]);
      if (adId === HOPE_DETAIL.ad_id) return json(HOPE_DETAIL);
      if (adId === NO_SUMMARY_DETAIL.ad_id) return json(NO_SUMMARY_DETAIL);
      return json({ detail: "not found" }, 404);
    }
    return json({ detail: "no such endpoint" }, 404);
  };

  globalThis.fetch = fetchImpl as typeof fetch;
  return stats;
}

/** Poll until the condition holds (views settle asynchronously). */
export async function until(condition: () => boolean, timeoutMs = 2000): Promise<void> {
  const start = Date.now();
  while (!condition()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error("condition not met within timeout");
    }
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}
