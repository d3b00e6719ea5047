// 2x2 compare view (source | edge condition | low-pass start | output)
// with wheel zoom and drag pan kept in sync across all four panels.

export interface ViewState {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function zoomAt(view: ViewState, cursorX: number, cursorY: number, factor: number): ViewState {
  const scale = Math.min(16, Math.max(1, view.scale * factor));
  const ratio = scale / view.scale;
  return {
    scale,
    offsetX: cursorX - ratio * (cursorX - view.offsetX),
    offsetY: cursorY - ratio * (cursorY - view.offsetY),
  };
}

export function panBy(view: ViewState, dx: number, dy: number): ViewState {
  return { ...view, offsetX: view.offsetX + dx, offsetY: view.offsetY + dy };
}

export const PANELS = ["source", "edges", "lowpass", "output"] as const;
export type PanelName = (typeof PANELS)[number];

export class CompareView {
  private view: ViewState = { scale: 1, offsetX: 0, offsetY: 0 };
  private images: Partial<Record<PanelName, HTMLImageElement>> = {};
  private dragging = false;
  private lastX = 0;
  private lastY = 0;

  constructor(private canvases: Record<PanelName, HTMLCanvasElement>) {
    for (const name of PANELS) {
      const canvas = canvases[name];
      canvas.addEventListener("wheel", (ev) => {
        ev.preventDefault();
        const rect = canvas.getBoundingClientRect();
        const factor = ev.deltaY < 0 ? 1.2 : 1 / 1.2;
        this.view = zoomAt(this.view, ev.clientX - rect.left, ev.clientY - rect.top, factor);
        this.redraw();
      });
      canvas.addEventListener("mousedown", (ev) => {
        this.dragging = true;
        this.lastX = ev.clientX;
        this.lastY = ev.clientY;
      });
      canvas.addEventListener("mousemove", (ev) => {
        if (!this.dragging) return;
        this.view = panBy(this.view, ev.clientX - this.lastX, ev.clientY - this.lastY);
        this.lastX = ev.clientX;
        this.lastY = ev.clientY;
        this.redraw();
      });
      window.addEventListener("mouseup", () => {
        this.dragging = false;
      });
    }
  }

  setImage(name: PanelName, base64Png: string | null): void {
    if (base64Png === null) {
      delete this.images[name];
      this.redraw();
      return;
    }
    const img = new Image();
    img.onload = () => {
      this.images[name] = img;
      this.redraw();
    };
    img.src = `data:image/png;base64,${base64Png}`;
  }

  resetView(): void {
    this.view = { scale: 1, offsetX: 0, offsetY: 0 };
    this.redraw();
  }

  redraw(): void {
    for (const name of PANELS) {
      const canvas = this.canvases[name];
      const ctx = canvas.getContext("2d");
      if (!ctx) continue;
      ctx.fillStyle = "#000";
      ctx.fillRect(0, 0, canvas.width, canvas.height);
      const img = this.images[name];
      if (!img) continue;
      ctx.imageSmoothingEnabled = this.view.scale < 4;
      const base = Math.min(canvas.width / img.width, canvas.height / img.height);
      const s = base * this.view.scale;
      ctx.drawImage(img, this.view.offsetX, this.view.offsetY, img.width * s, img.height * s);
    }
  }
}
