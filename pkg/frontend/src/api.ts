import { SseParser } from "./sse.js";
import type {
  ExecutionRequest,
  ExecutionStatus,
  NamedQuery,
  NetworkInfo,
  ServerEvent,
} from "./types.js";

export interface ErrorBody {
  error: string;
  position?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBody,
  ) {
    super(body.error);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly baseUrl: string,
    fetchFn?: FetchLike,
  ) {
    // Bind lazily so the global fetch keeps its expected receiver.
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async errorBody(res: Response): Promise<ErrorBody> {
    try {
      const body = (await res.json()) as ErrorBody;
      if (typeof body.error === "string") {
        return body;
      }
    } catch {
      // fall through to the status line
    }
    return { error: `request failed with status ${res.status}` };
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path);
    if (!res.ok) {
      throw new ApiError(res.status, await this.errorBody(res));
    }
    return (await res.json()) as T;
  }

  async listNetworks(): Promise<NetworkInfo[]> {
    const body = await this.getJson<{ networks: NetworkInfo[] }>("/api/networks");
    return body.networks;
  }

  async listQueries(): Promise<NamedQuery[]> {
    const body = await this.getJson<{ queries: NamedQuery[] }>("/api/queries");
    return body.queries;
  }

  async getExecution(id: string): Promise<ExecutionStatus> {
    return this.getJson<ExecutionStatus>(`/api/executions/${id}`);
  }

  async startExecution(request: ExecutionRequest): Promise<string> {
    const res = await this.fetchFn(`${this.baseUrl}/api/executions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (res.status !== 202) {
      throw new ApiError(res.status, await this.errorBody(res));
    }
    const body = (await res.json()) as { id: string };
    return body.id;
  }

  // Streams every buffered event from the start; ends after done/error.
  async *streamEvents(id: string): AsyncGenerator<ServerEvent> {
    const res = await this.fetchFn(`${this.baseUrl}/api/executions/${id}/events`);
    if (!res.ok || res.body === null) {
      throw new ApiError(res.status, await this.errorBody(res));
    }
    const reader = res.body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    for (;;) {
      const { done, value } = await reader.read();
      const chunk = done ? "" : decoder.decode(value, { stream: true });
      for (const message of parser.push(chunk)) {
        yield { kind: message.event, payload: JSON.parse(message.data) } as ServerEvent;
      }
      if (done) {
        return;
      }
    }
  }
}
