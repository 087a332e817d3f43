/** Browser bootstrap: wires DOM events to the Viewer. */

import { FrameClient } from './client';
import { RESOLUTION_PRESETS, RenderMode } from './state';
import { Viewer } from './viewer';

function query<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

function bootstrap(): void {
  const image = query<HTMLImageElement>('frame');
  const banner = query<HTMLDivElement>('banner');
  const hud = query<HTMLDivElement>('hud');
  const serverInput = query<HTMLInputElement>('server-url');
  const connectButton = query<HTMLButtonElement>('connect');
  const modeSelect = query<HTMLSelectElement>('mode');
  const presetSelect = query<HTMLSelectElement>('preset');
  const exportButton = query<HTMLButtonElement>('export-pose');

  for (const preset of RESOLUTION_PRESETS) {
    const option = document.createElement('option');
    option.value = preset.label;
    option.textContent = `${preset.width}x${preset.height}`;
    presetSelect.appendChild(option);
  }

  let viewer: Viewer | null = null;

  const connect = async () => {
    viewer = new Viewer(new FrameClient(serverInput.value), { image, banner, hud });
    try {
      await viewer.connect();
    } catch {
      // the banner already shows the failure; keep the retry affordance live
    }
  };
  connectButton.addEventListener('click', () => void connect());

  let dragging = false;
  let lastX = 0;
  let lastY = 0;
  image.addEventListener('pointerdown', (e) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
    image.setPointerCapture(e.pointerId);
  });
  image.addEventListener('pointermove', (e) => {
    if (!dragging || viewer === null) {
      return;
    }
    viewer.drag(e.clientX - lastX, e.clientY - lastY);
    lastX = e.clientX;
    lastY = e.clientY;
  });
  image.addEventListener('pointerup', () => {
    dragging = false;
  });
  image.addEventListener('wheel', (e) => {
    e.preventDefault();
    viewer?.dolly(Math.sign(e.deltaY));
  });

  modeSelect.addEventListener('change', () => {
    viewer?.setMode(modeSelect.value as RenderMode);
  });
  presetSelect.addEventListener('change', () => {
    const preset = RESOLUTION_PRESETS.find((p) => p.label === presetSelect.value);
    if (preset) {
      viewer?.setPreset(preset);
    }
  });
  exportButton.addEventListener('click', () => {
    const pose = viewer?.exportPose();
    if (!pose) {
      return;
    }
    const blob = new Blob([pose + '\n'], { type: 'application/json' });
    const a = document.createElement('a');
    a.href = URL.createObjectURL(blob);
    a.download = 'pose.json';
    a.click();
    URL.revokeObjectURL(a.href);
  });

  void connect();
}

bootstrap();
