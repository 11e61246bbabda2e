/** Browser entry point: connect to the backend and mount the console. */

import { ConsoleClient } from "./client.js";
import { mountConsole } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const url =
  params.get("backend") ?? `ws://${window.location.hostname || "127.0.0.1"}:8765`;

const client = new ConsoleClient(url);
const container = document.getElementById("app");
if (container === null) {
  throw new Error("missing #app container");
}
mountConsole(container, client);
client.connect();
