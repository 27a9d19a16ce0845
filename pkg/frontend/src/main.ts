/**
 * Browser entry point: wires the socket client, keyboard controller,
 * canvas renderer, sound feed, and sample playback together. The socket
 * handler only mutates AppState; the render loop reads it each frame.
 */

import { BridgeClient } from "./client.js";
import { KeyController, parseKeymap } from "./keyboard.js";
import { PROTOCOL_VERSION } from "./protocol.js";
import { drawScene } from "./renderer.js";
import { buildScene } from "./scene.js";
import { AppState } from "./state.js";
import { SamplePlayer } from "./audio.js";

function must<T extends Element>(selector: string): T {
  const el = document.querySelector<T>(selector);
  if (!el) throw new Error(`missing element ${selector}`);
  return el;
}

function toast(text: string): void {
  const box = must<HTMLDivElement>("#toast");
  box.textContent = text;
  box.classList.add("visible");
  setTimeout(() => box.classList.remove("visible"), 2500);
}

async function start(): Promise<void> {
  const keymap = parseKeymap(await (await fetch("keymap.json")).json());
  const controller = new KeyController(keymap);
  const state = new AppState();
  const player = new SamplePlayer();

  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/ws`;
  let versionChecked = false;
  const client = new BridgeClient({
    url: wsUrl,
    socketFactory: (url) => new WebSocket(url),
    onMessage: (msg) => {
      state.apply(msg);
      if (msg.kind === "snapshot" && !versionChecked) {
        versionChecked = true;
        if (msg.protocol_version !== PROTOCOL_VERSION) {
          toast(`protocol version mismatch: server ${msg.protocol_version}, client ${PROTOCOL_VERSION}`);
        }
      }
    },
    onStatus: (status) => {
      state.status = status;
      if (status !== "connected") versionChecked = false;
    },
    onDropped: (command) => toast(`dropped ${command.kind}: not connected`),
    onProtocolError: (err) => console.warn("undecodable frame:", err.message),
  });
  client.connect();

  // On-screen piano-style key row.
  const row = must<HTMLDivElement>("#keys");
  const keyButtons = new Map<string, HTMLButtonElement>();
  for (const binding of controller.bindings) {
    const button = document.createElement("button");
    button.className = "key";
    button.innerHTML = `<span class="label">${binding.label}</span>` +
      `<span class="code">${binding.code.replace(/^Key/, "")}</span>`;
    button.addEventListener("click", () => {
      client.send(controller.commandForBinding(binding));
      flash(binding.code);
    });
    row.appendChild(button);
    keyButtons.set(binding.code, button);
  }

  function flash(code: string): void {
    const button = keyButtons.get(code);
    if (!button) return;
    button.classList.add("down");
    setTimeout(() => button.classList.remove("down"), 120);
  }

  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    const command = controller.commandFor(ev.code);
    if (!command) return;
    ev.preventDefault();
    client.send(command);
    flash(ev.code);
  });

  // Render loop.
  const canvas = must<HTMLCanvasElement>("#stage");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2D canvas unavailable");
  const feedEl = must<HTMLUListElement>("#feed");

  let lastFeedSeq = -1;
  function frame(): void {
    const rect = canvas.getBoundingClientRect();
    if (canvas.width !== rect.width || canvas.height !== rect.height) {
      canvas.width = rect.width;
      canvas.height = rect.height;
    }
    drawScene(ctx!, buildScene(state), canvas.width, canvas.height);

    for (const sound of state.drainSounds()) {
      player.play(sound);
    }
    const newest = state.feed[state.feed.length - 1];
    if (newest && newest.seq !== lastFeedSeq) {
      lastFeedSeq = newest.seq;
      feedEl.replaceChildren(
        ...state.feed
          .slice()
          .reverse()
          .map((entry) => {
            const li = document.createElement("li");
            li.className = entry.kind;
            li.textContent = `${entry.t.toFixed(3)}s ${entry.text}`;
            return li;
          }),
      );
    }
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

start().catch((err) => {
  console.error(err);
  document.body.textContent = `failed to start: ${err}`;
});
