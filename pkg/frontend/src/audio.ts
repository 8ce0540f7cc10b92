// Browser audio playback: one HTMLAudioElement per sample, preloaded per
// task, restart-from-beginning on each hover enter, never more than one
// sample audible.

import type { ApiClient } from "./api.js";
import type { AudioPort } from "./engine.js";

export class WebAudio implements AudioPort {
  private elements = new Map<string, HTMLAudioElement>();
  private current: HTMLAudioElement | null = null;

  async preload(api: ApiClient, sampleIds: string[]): Promise<void> {
    this.elements.clear();
    await Promise.all(sampleIds.map((id) => new Promise<void>((resolve) => {
      const el = new Audio(api.audioUrl(id));
      el.preload = "auto";
      el.addEventListener("canplaythrough", () => resolve(), { once: true });
      el.addEventListener("error", () => resolve(), { once: true });
      this.elements.set(id, el);
      el.load();
    })));
  }

  play(sampleId: string): void {
    this.stop();
    const el = this.elements.get(sampleId);
    if (!el) return;
    el.currentTime = 0;
    void el.play().catch(() => undefined);
    this.current = el;
  }

  stop(): void {
    if (this.current) {
      this.current.pause();
      this.current = null;
    }
  }
}
