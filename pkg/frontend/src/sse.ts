/**
 * @fileoverview Event-stream subscription over fetch streaming.
 *
 * Browsers and node both stream response bodies, so the same client runs
 * in the page and in tests. On every (re)connect the caller builds the URL,
 * typically appending its last-seen revision; the service answers a stale
 * revision with a synthetic recompute-done so the client refetches.
 */

export interface EventStreamOptions {
  url: () => string;
  onEvent: (name: string, data: Record<string, unknown>) => void;
  onStatus?: (connected: boolean) => void;
  retryMs?: number;
  fetchImpl?: typeof fetch;
}

export interface EventStreamHandle {
  close(): void;
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export function openEventStream(opts: EventStreamOptions): EventStreamHandle {
  const doFetch = opts.fetchImpl ?? fetch;
  let closed = false;
  let controller: AbortController | null = null;

  void (async () => {
    while (!closed) {
      controller = new AbortController();
      try {
        const resp = await doFetch(opts.url(), {
          headers: { accept: "text/event-stream" },
          signal: controller.signal,
        });
        if (!resp.ok || !resp.body) throw new Error(`stream http ${resp.status}`);
        opts.onStatus?.(true);
        await readStream(resp.body, opts.onEvent);
      } catch {
        // fall through to retry; abort on close lands here too
      }
      opts.onStatus?.(false);
      if (!closed) await sleep(opts.retryMs ?? 1000);
    }
  })();

  return {
    close() {
      closed = true;
      controller?.abort();
    },
  };
}

async function readStream(
  body: ReadableStream<Uint8Array>,
  onEvent: (name: string, data: Record<string, unknown>) => void,
): Promise<void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buf = "";
  let event = "";
  let data = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (done) break;
    buf += decoder.decode(value, { stream: true });
    let nl;
    while ((nl = buf.indexOf("\n")) >= 0) {
      const line = buf.slice(0, nl).replace(/\r$/, "");
      buf = buf.slice(nl + 1);
      if (line === "") {
        if (event) onEvent(event, data ? JSON.parse(data) : {});
        event = "";
        data = "";
      } else if (line.startsWith(":")) {
        continue; // keepalive comment
      } else if (line.startsWith("event:")) {
        event = line.slice(6).trim();
      } else if (line.startsWith("data:")) {
        data += line.slice(5).trim();
      }
    }
  }
}
