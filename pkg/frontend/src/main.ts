// Bootstrap: server address comes from query parameters so the same build
// can point anywhere, e.g. index.html?host=127.0.0.1&port=7788 or ?url=ws://...

import { Viewer } from "./viewer.js";

function serviceUrl(): string {
  const params = new URLSearchParams(location.search);
  const explicit = params.get("url");
  if (explicit) return explicit;
  const host = params.get("host") ?? "127.0.0.1";
  const port = params.get("port") ?? "7788";
  return `ws://${host}:${port}/`;
}

const root = document.getElementById("viewer");
if (!root) throw new Error("missing #viewer element");
const viewer = new Viewer(root, serviceUrl());
viewer.start();
