// WebSocket-to-TCP relay: each WebSocket message becomes one line on the
// TCP debug socket, and each TCP line comes back as one WebSocket message.
// One TCP connection (= one debug session) per WebSocket client.

import net from "node:net";
import { WebSocketServer, WebSocket } from "ws";

export interface RelayOptions {
  wsPort: number;
  tcpHost?: string;
  tcpPort?: number;
}

export interface Relay {
  port: number;
  close(): Promise<void>;
}

export function startRelay(options: RelayOptions): Promise<Relay> {
  const tcpHost = options.tcpHost ?? "127.0.0.1";
  const tcpPort = options.tcpPort ?? 7331;
  const wss = new WebSocketServer({ port: options.wsPort });

  wss.on("connection", (client: WebSocket) => {
    const upstream = net.createConnection({ host: tcpHost, port: tcpPort });
    let buffer = "";

    upstream.on("data", (chunk) => {
      buffer += chunk.toString("utf-8");
      let nl: number;
      while ((nl = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, nl);
        buffer = buffer.slice(nl + 1);
        if (line.trim()) client.send(line);
      }
    });
    upstream.on("close", () => client.close());
    upstream.on("error", () => client.close());

    client.on("message", (data) => {
      upstream.write(data.toString() + "\n");
    });
    client.on("close", () => upstream.destroy());
  });

  return new Promise((resolve, reject) => {
    wss.on("error", reject);
    wss.on("listening", () => {
      const addr = wss.address();
      const port = typeof addr === "object" && addr ? addr.port : options.wsPort;
      resolve({
        port,
        close: () =>
          new Promise<void>((done) => {
            for (const client of wss.clients) client.terminate();
            wss.close(() => done());
          }),
      });
    });
  });
}

const invokedDirectly =
  process.argv[1] && process.argv[1].endsWith("relay.js");
if (invokedDirectly) {
  const wsPort = Number(process.env.RELAY_WS_PORT ?? 8765);
  const tcpPort = Number(process.env.RELAY_TCP_PORT ?? 7331);
  startRelay({ wsPort, tcpPort }).then((relay) => {
    console.log(`relay: ws://127.0.0.1:${relay.port} -> tcp 127.0.0.1:${tcpPort}`);
  });
}
