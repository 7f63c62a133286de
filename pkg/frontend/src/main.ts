import { MixerSession } from "./session.js";
import { MixerView } from "./ui.js";

function defaultUrl(): string {
  const fromHash = window.location.hash.slice(1);
  if (fromHash) return fromHash;
  return `ws://${window.location.hostname || "127.0.0.1"}:7340`;
}

function boot(): void {
  const controls = document.getElementById("controls")!;
  const root = document.getElementById("mixer")!;
  const input = document.createElement("input");
  input.type = "text";
  input.value = defaultUrl();
  input.size = 40;
  const button = document.createElement("button");
  button.textContent = "connect";
  controls.append(input, button);

  let session: MixerSession | null = null;
  button.addEventListener("click", () => {
    session?.close();
    root.replaceChildren();
    session = new MixerSession({ url: input.value });
    new MixerView(root, session);
    session.connect();
  });
}

boot();
