import { AddressInfo } from "node:net";
import { createServer, Server, ServerResponse } from "node:http";
import { afterEach, describe, expect, it } from "vitest";
import { openEventStream } from "../src/sse.js";
import { sleep, until } from "./fixtures.js";

let server: Server;
let handle: { close(): void } | null = null;

afterEach(async () => {
  handle?.close();
  handle = null;
  server.closeAllConnections();
  await new Promise((r) => server.close(r));
});

function sse(res: ServerResponse): void {
  res.writeHead(200, {
    "content-type": "text/event-stream",
    "cache-control": "no-cache",
  });
}

async function listen(srv: Server): Promise<string> {
  await new Promise<void>((r) => srv.listen(0, "127.0.0.1", r));
  const { port } = srv.address() as AddressInfo;
  return `http://127.0.0.1:${port}/events`;
}

describe("event stream client", () => {
  it("parses events, survives chunk splits, skips keepalives", async () => {
    const open: ServerResponse[] = [];
    server = createServer((_req, res) => {
      sse(res);
      open.push(res);
      res.write(": keepalive\n\n");
      res.write('event: connected\ndata: {"revision": 1}\n\n');
      // an event broken across writes must reassemble
      res.write("event: recompute-st");
      setTimeout(() => {
        res.write('arted\ndata: {"revision": 2, "segment": 0}\n\n');
      }, 20);
    });
    const url = await listen(server);

    const events: Array<[string, unknown]> = [];
    handle = openEventStream({
      url: () => url,
      onEvent: (name, data) => events.push([name, data]),
      retryMs: 20,
    });

    await until(() => events.length >= 2);
    expect(events).toEqual([
      ["connected", { revision: 1 }],
      ["recompute-started", { revision: 2, segment: 0 }],
    ]);
  });

  it("reconnects with the caller's last-seen revision", async () => {
    const urls: string[] = [];
    server = createServer((req, res) => {
      urls.push(req.url ?? "");
      sse(res);
      if (urls.length === 1) {
        res.write('event: connected\ndata: {"revision": 1}\n\n');
        res.write('event: recompute-done\ndata: {"revision": 4}\n\n');
        res.end(); // drop the stream; client should come back
      } else {
        res.write('event: connected\ndata: {"revision": 4}\n\n');
      }
    });
    const url = await listen(server);

    let lastRev = 1;
    const drops: boolean[] = [];
    handle = openEventStream({
      url: () => `${url}?revision=${lastRev}`,
      onEvent: (_name, data) => {
        if (typeof data.revision === "number") lastRev = data.revision;
      },
      onStatus: (ok) => drops.push(ok),
      retryMs: 20,
    });

    await until(() => urls.length >= 2);
    expect(urls[0]).toBe("/events?revision=1");
    expect(urls[1]).toBe("/events?revision=4");
    expect(drops[0]).toBe(true); // connected
    expect(drops).toContain(false); // and noticed the drop
  });

  it("close() stops the reconnect loop", async () => {
    let hits = 0;
    server = createServer((_req, res) => {
      hits += 1;
      sse(res);
      res.end();
    });
    const url = await listen(server);

    handle = openEventStream({ url: () => url, onEvent: () => {}, retryMs: 10 });
    await until(() => hits >= 2);
    handle.close();
    handle = null;
    const seen = hits;
    await sleep(100);
    expect(hits).toBe(seen);
  });
});
