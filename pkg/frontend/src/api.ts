/** Typed client for the rtfs service; transport is injectable for tests. */

import type {
  EventStream,
  EventStreamFactory,
  FetchLike,
  ResultPayload,
  StatusPayload,
  WhatifDiagnostic,
  WhatifRequest,
} from "./types.js";

export type WhatifOutcome =
  | { ok: true; result: ResultPayload }
  | { ok: false; errors: WhatifDiagnostic[] };

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  async status(): Promise<StatusPayload> {
    const resp = await this.fetchImpl(`${this.baseUrl}/status`);
    if (!resp.ok) throw new Error(`GET /status -> ${resp.status}`);
    return (await resp.json()) as StatusPayload;
  }

  async latestResult(): Promise<ResultPayload | null> {
    const resp = await this.fetchImpl(`${this.baseUrl}/result/latest`);
    if (resp.status === 404) return null;
    if (!resp.ok) throw new Error(`GET /result/latest -> ${resp.status}`);
    return (await resp.json()) as ResultPayload;
  }

  /**
   * Submit a what-if request. Limit violations come back as structured
   * per-unit diagnostics rather than a thrown error, so the form can render
   * them inline.
   */
  async whatif(request: WhatifRequest): Promise<WhatifOutcome> {
    const resp = await this.fetchImpl(`${this.baseUrl}/whatif`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    if (resp.status === 422) {
      const body = (await resp.json()) as {
        detail?: { errors?: WhatifDiagnostic[] };
      };
      return { ok: false, errors: body.detail?.errors ?? [] };
    }
    if (!resp.ok) throw new Error(`POST /whatif -> ${resp.status}`);
    return { ok: true, result: (await resp.json()) as ResultPayload };
  }
}

export interface StreamHandlers {
  onStatus(status: StatusPayload): void;
  onResult(summary: { nadir_hz: number }): void;
  onConnection(up: boolean): void;
}

/**
 * Subscribe to the service event stream. Returns a handle that closes the
 * underlying connection. Handlers fire synchronously on receipt, so the
 * console reflects a new result within the same refresh interval.
 */
export function openStream(
  baseUrl: string,
  makeStream: EventStreamFactory,
  handlers: StreamHandlers,
): { close(): void; stream: EventStream } {
  const stream = makeStream(`${baseUrl}/stream`);
  stream.onopen = () => handlers.onConnection(true);
  stream.onerror = () => handlers.onConnection(false);
  stream.addEventListener("status", (event) => {
    handlers.onStatus(JSON.parse(event.data) as StatusPayload);
  });
  stream.addEventListener("result", (event) => {
    handlers.onResult(JSON.parse(event.data) as { nadir_hz: number });
  });
  return { close: () => stream.close(), stream };
}
