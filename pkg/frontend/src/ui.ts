// DOM rendering: a marker field (sources at their normalized screen
// coordinates), one strip per source with slider + meter + staleness, and a
// connection banner.

import { GAIN_MAX, GAIN_MIN } from "./protocol.js";
import { MixerSession } from "./session.js";

const METER_RANGE_DB = 60; // meter maps [-60, 0] dB onto its width

export function formatCoord(value: number): string {
  return value.toFixed(3);
}

export function meterFraction(db: number): number {
  return Math.min(Math.max((db + METER_RANGE_DB) / METER_RANGE_DB, 0), 1);
}

export class MixerView {
  private readonly markerField: HTMLElement;
  private readonly strips: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly markers = new Map<string, HTMLElement>();
  private readonly rows = new Map<string, HTMLElement>();

  constructor(
    private readonly root: HTMLElement,
    private readonly session: MixerSession,
  ) {
    this.banner = document.createElement("div");
    this.banner.className = "banner";
    this.markerField = document.createElement("div");
    this.markerField.className = "marker-field";
    this.strips = document.createElement("div");
    this.strips.className = "strips";
    root.append(this.banner, this.markerField, this.strips);
    session.onChange(() => this.render());
    this.render();
  }

  render(): void {
    this.banner.textContent =
      this.session.status === "open"
        ? `connected (t=${this.session.streamTime.toFixed(1)} s)`
        : this.session.status === "connecting"
          ? `reconnecting (retry in ${(this.session.reconnectDelayMs / 1000).toFixed(1)} s)`
          : "disconnected";
    this.banner.dataset.status = this.session.status;

    const liveIds = new Set(this.session.sources.keys());
    for (const [id, el] of this.markers) {
      if (!liveIds.has(id)) {
        el.remove();
        this.markers.delete(id);
        this.rows.get(id)?.remove();
        this.rows.delete(id);
      }
    }
    for (const source of this.session.sources.values()) {
      this.renderMarker(source.id);
      this.renderStrip(source.id);
    }
  }

  private renderMarker(id: string): void {
    const source = this.session.sources.get(id)!;
    let marker = this.markers.get(id);
    if (!marker) {
      marker = document.createElement("div");
      marker.className = "marker";
      marker.dataset.sourceId = id;
      this.markerField.append(marker);
      this.markers.set(id, marker);
    }
    marker.style.left = `${(parseFloat(formatCoord(source.coords[0])) * 100).toFixed(1)}%`;
    marker.style.top = `${(parseFloat(formatCoord(source.coords[1])) * 100).toFixed(1)}%`;
    marker.textContent = `${source.kind}:${id}`;
    marker.classList.toggle("inactive", !source.active);
  }

  private renderStrip(id: string): void {
    const source = this.session.sources.get(id)!;
    let row = this.rows.get(id);
    if (!row) {
      row = document.createElement("div");
      row.className = "strip";
      row.dataset.sourceId = id;

      const label = document.createElement("span");
      label.className = "label";

      const slider = document.createElement("input");
      slider.type = "range";
      slider.min = String(GAIN_MIN);
      slider.max = String(GAIN_MAX);
      slider.step = "0.1";
      slider.addEventListener("input", () => {
        this.session.setGain(id, Number(slider.value));
      });

      const meter = document.createElement("div");
      meter.className = "meter";
      const fill = document.createElement("div");
      fill.className = "meter-fill";
      meter.append(fill);

      const status = document.createElement("span");
      status.className = "status";

      row.append(label, slider, meter, status);
      this.strips.append(row);
      this.rows.set(id, row);
    }
    (row.querySelector(".label") as HTMLElement).textContent =
      `${source.kind} ${id}`;
    const slider = row.querySelector("input") as HTMLInputElement;
    if (document.activeElement !== slider) {
      slider.value = source.sliderValue.toFixed(1);
    }
    const db = this.session.meterDb(id);
    (row.querySelector(".meter-fill") as HTMLElement).style.width =
      `${(meterFraction(db) * 100).toFixed(1)}%`;
    const staleness = this.session.stalenessSeconds(id);
    (row.querySelector(".status") as HTMLElement).textContent =
      staleness === null
        ? "no levels yet"
        : `${db.toFixed(1)} dB (${staleness.toFixed(1)} s ago)`;
  }
}
