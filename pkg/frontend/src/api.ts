/** Typed client for the curation service HTTP API.
 *
 * This is the UI's only data source: every number the interface shows
 * originates from one of these responses.  The client does no retrying
 * of its own; transport failures surface as `ApiError` with
 * `transport: true` so the caller can show a banner and let the user
 * decide when to try again.
 */

export interface Health {
  status: string;
  pairs: number;
  annotations: number;
  patterns: string[];
}

export interface QuestionOut {
  image_slot: number;
  text: string;
  options: string[];
  correct_index: number;
}

export interface AnnotationOut {
  seq: number;
  pair_id: string;
  author: string;
  created_at: string;
  status: string;
  patterns: string[];
  questions: QuestionOut[];
}

export interface PairSummary {
  pair_id: string;
  i: number;
  j: number;
  image_id_i: string;
  image_id_j: string;
  sim_a: number;
  sim_b: number;
  gap: number;
  annotation_status: string | null;
  image_urls: string[];
  thumb_urls: string[];
}

export interface PairDetail extends PairSummary {
  annotation: AnnotationOut | null;
}

export interface Page<T> {
  items: T[];
  page: number;
  size: number;
  total: number;
}

export interface QuestionIn {
  image_slot: number;
  text: string;
  options: string[];
  correct_index: number;
}

export interface AnnotationIn {
  author: string;
  status: "draft" | "accepted" | "rejected";
  patterns: string[];
  questions: QuestionIn[];
}

export type SortOrder = "gap" | "index";
export type StatusFilter = "any" | "none" | "draft" | "accepted" | "rejected";

export interface ListQuery {
  page: number;
  size: number;
  sort: SortOrder;
  status: StatusFilter;
}

export interface ExportPayload {
  /** The service's bytes, verbatim; this is what a download must save. */
  bytes: Uint8Array;
  text: string;
  doc: unknown;
}

export class ApiError extends Error {
  /** HTTP status, or 0 when the request never reached the service. */
  readonly status: number;
  /** True when the service was unreachable (no HTTP response at all). */
  readonly transport: boolean;

  constructor(message: string, status: number, transport = false) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.transport = transport;
  }
}

type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

/** Pull the server's own words out of an error response body. */
async function errorMessage(response: Response): Promise<string> {
  const raw = await response.text();
  try {
    const parsed = JSON.parse(raw);
    if (parsed && typeof parsed === "object" && "detail" in parsed) {
      const detail = (parsed as { detail: unknown }).detail;
      return typeof detail === "string" ? detail : JSON.stringify(detail);
    }
  } catch {
    // not JSON, fall through to the raw body
  }
  return raw || `${response.status} ${response.statusText}`;
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl = "", fetchFn?: FetchFn) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(
        `service unreachable: ${err instanceof Error ? err.message : String(err)}`,
        0,
        true,
      );
    }
    if (!response.ok) {
      throw new ApiError(await errorMessage(response), response.status);
    }
    return response;
  }

  private async requestJson<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  health(): Promise<Health> {
    return this.requestJson<Health>("/api/health");
  }

  listPairs(query: ListQuery): Promise<Page<PairSummary>> {
    const params = new URLSearchParams({
      page: String(query.page),
      size: String(query.size),
      sort: query.sort,
      status: query.status,
    });
    return this.requestJson<Page<PairSummary>>(`/api/pairs?${params}`);
  }

  getPair(pairId: string): Promise<PairDetail> {
    return this.requestJson<PairDetail>(
      `/api/pairs/${encodeURIComponent(pairId)}`,
    );
  }

  putAnnotation(pairId: string, body: AnnotationIn): Promise<AnnotationOut> {
    return this.requestJson<AnnotationOut>(
      `/api/pairs/${encodeURIComponent(pairId)}/annotation`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      },
    );
  }

  /** Fetch the export document, keeping the exact bytes for download. */
  async exportBenchmark(): Promise<ExportPayload> {
    const response = await this.request("/api/export");
    const buffer = await response.arrayBuffer();
    const bytes = new Uint8Array(buffer);
    const text = new TextDecoder().decode(bytes);
    return { bytes, text, doc: JSON.parse(text) };
  }
}
