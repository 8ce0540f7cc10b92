// Starfield rendering on a 2D canvas: grey circles for the baseline,
// envelope-contour polygons for shape labels, HSL fills for color labels,
// and circle-clipped texture images; green outline on the playing sample,
// red flash on a misclicked one, and the corner arming prompt.

import type { TaskEngine } from "./engine.js";
import { cornerRect } from "./geometry.js";
import type { Scene, SceneSample } from "./types.js";

const BACKGROUND = "#d9d9d9";
const BASE_FILL = "#8c8c8c";
const OUTLINE_PLAYING = "#2e9e4f";
const OUTLINE_MISCLICK = "#d03232";

export class SceneRenderer {
  private ctx: CanvasRenderingContext2D;
  private textures = new Map<string, HTMLImageElement>();

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas unavailable");
    this.ctx = ctx;
  }

  async preloadTextures(scene: Scene, urlFor: (id: string) => string): Promise<void> {
    this.textures.clear();
    if (scene.label_mode !== "texture") return;
    await Promise.all(scene.samples.map((s) => new Promise<void>((resolve) => {
      const img = new Image();
      img.onload = () => resolve();
      img.onerror = () => resolve();
      img.src = urlFor(s.texture_ref ?? s.id);
      this.textures.set(s.id, img);
    })));
  }

  draw(engine: TaskEngine, nowMs: number): void {
    const scene = engine.scene;
    this.canvas.width = scene.canvas.w;
    this.canvas.height = scene.canvas.h;
    const ctx = this.ctx;
    ctx.fillStyle = BACKGROUND;
    ctx.fillRect(0, 0, scene.canvas.w, scene.canvas.h);

    if (engine.state === "waiting") {
      this.drawCornerPrompt(engine, nowMs);
      return;
    }
    for (const s of scene.samples) this.drawSample(scene, s);
    if (engine.playingId) this.outline(scene, engine.playingId, OUTLINE_PLAYING);
    const flash = engine.misclickFlash;
    if (flash && nowMs < flash.untilMs) this.outline(scene, flash.id, OUTLINE_MISCLICK);
  }

  private drawCornerPrompt(engine: TaskEngine, nowMs: number): void {
    const ctx = this.ctx;
    const scene = engine.scene;
    const rect = cornerRect(scene.canvas, engine.task.start_corner);
    ctx.fillStyle = "#b5c9e2";
    ctx.fillRect(rect.x0, rect.y0, rect.x1 - rect.x0, rect.y1 - rect.y0);
    ctx.strokeStyle = "#4a6fa5";
    ctx.lineWidth = 2 + 4 * engine.armingProgress(nowMs);
    ctx.strokeRect(rect.x0, rect.y0, rect.x1 - rect.x0, rect.y1 - rect.y0);
    ctx.fillStyle = "#333";
    ctx.font = "16px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("Hold the cursor in the highlighted corner to begin",
                 scene.canvas.w / 2, scene.canvas.h / 2);
  }

  private drawSample(scene: Scene, s: SceneSample): void {
    const ctx = this.ctx;
    const r = scene.canvas.diameter / 2;
    switch (scene.label_mode) {
      case "shape": {
        const path = s.shape_path ?? [];
        ctx.beginPath();
        // glyph coordinates are unit-scale, y up; canvas y grows down
        path.forEach(([px, py], i) => {
          const x = s.x + px * r;
          const y = s.y - py * r;
          if (i === 0) ctx.moveTo(x, y);
          else ctx.lineTo(x, y);
        });
        ctx.closePath();
        ctx.fillStyle = BASE_FILL;
        ctx.fill();
        break;
      }
      case "color": {
        const [h, sat, light] = s.color_hsl ?? [0, 0, 0.5];
        ctx.beginPath();
        ctx.arc(s.x, s.y, r, 0, 2 * Math.PI);
        ctx.fillStyle = `hsl(${h}, ${sat * 100}%, ${light * 100}%)`;
        ctx.fill();
        break;
      }
      case "texture": {
        const img = this.textures.get(s.id);
        ctx.save();
        ctx.beginPath();
        ctx.arc(s.x, s.y, r, 0, 2 * Math.PI);
        ctx.clip();
        if (img && img.complete && img.naturalWidth > 0) {
          ctx.drawImage(img, s.x - r, s.y - r, 2 * r, 2 * r);
        } else {
          ctx.fillStyle = BASE_FILL;
          ctx.fill();
        }
        ctx.restore();
        break;
      }
      default: {
        ctx.beginPath();
        ctx.arc(s.x, s.y, r, 0, 2 * Math.PI);
        ctx.fillStyle = BASE_FILL;
        ctx.fill();
      }
    }
  }

  private outline(scene: Scene, sampleId: string, color: string): void {
    const s = scene.samples.find((x) => x.id === sampleId);
    if (!s) return;
    const ctx = this.ctx;
    ctx.beginPath();
    ctx.arc(s.x, s.y, scene.canvas.diameter / 2 + 3, 0, 2 * Math.PI);
    ctx.strokeStyle = color;
    ctx.lineWidth = 4;
    ctx.stroke();
  }
}
