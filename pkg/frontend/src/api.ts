// Typed client for the spotforge search service. The UI is a pure consumer
// of this API: it renders exactly what the server returns, in server order.

export interface SearchHit {
  ad_id: string;
  score: number;
  match_kind: "exact" | "fuzzy";
  snippet: string;
  span: [number, number];
  year: number;
  candidate: string;
}

export interface TranscriptSegment {
  start_s: number;
  end_s: number;
  text: string;
}

export interface AdFrame {
  timestamp_s: number;
  origin: string;
  image_url: string;
}

export interface AdDetail {
  ad_id: string;
  year: number;
  candidate: string;
  party: string;
  title: string | null;
  attack_ad: boolean;
  duration_s: number;
  video_path: string | null;
  transcript: { segments: TranscriptSegment[]; full_text: string };
  summary: string | null;
  frames: AdFrame[];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, { headers: { accept: "application/json" } });
  } catch (err) {
    throw new ApiError(0, `service unreachable: ${String(err)}`);
  }
  if (!response.ok) {
    throw new ApiError(response.status, `request failed with status ${response.status}`);
  }
  return (await response.json()) as T;
}

export interface SearchFilters {
  year?: number | null;
  candidate?: string | null;
  limit?: number;
}

export class ApiClient {
  constructor(private base: string = "") {}

  async years(): Promise<number[]> {
    const body = await getJson<{ years: number[] }>(`${this.base}/api/years`);
    return body.years;
  }

  async candidates(year?: number | null): Promise<string[]> {
    const params = new URLSearchParams();
    if (year != null) params.set("year", String(year));
    const suffix = params.toString() ? `?${params.toString()}` : "";
    const body = await getJson<{ candidates: string[] }>(
      `${this.base}/api/candidates${suffix}`,
    );
    return body.candidates;
  }

  async search(q: string, filters: SearchFilters = {}): Promise<SearchHit[]> {
    const params = new URLSearchParams({ q });
    if (filters.year != null) params.set("year", String(filters.year));
    if (filters.candidate) params.set("candidate", filters.candidate);
    params.set("limit", String(filters.limit ?? 200));
    const body = await getJson<{ hits: SearchHit[] }>(
      `${this.base}/api/search?${params.toString()}`,
    );
    return body.hits;
  }

  async ad(adId: string): Promise<AdDetail> {
    return getJson<AdDetail>(`${this.base}/api/ads/${encodeURIComponent(adId)}`);
  }
}
