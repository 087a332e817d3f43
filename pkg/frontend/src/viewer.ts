/**
 * Viewer core: glues orbit state, the frame client and the latest-wins
 * scheduler to a minimal set of display elements. DOM event wiring lives
 * in main.ts so this class stays testable with plain fakes.
 */

import { FrameClient, FrameResponse } from './client';
import { LatestWinsScheduler } from './scheduler';
import {
  FieldMetadata,
  PoseRequest,
  ResolutionPreset,
  RenderMode,
  SteerInput,
  ViewerState,
  initialState,
  poseFromState,
  steer,
} from './state';

export interface DisplayElements {
  /** Target for the decoded frame; assigned an object URL per frame. */
  image: { src: string };
  /** Error banner; hidden while the connection is healthy. */
  banner: { textContent: string | null; hidden: boolean };
  /** HUD line showing latency, coverage, mode and resolution. */
  hud: { textContent: string | null };
}

export interface UrlFactory {
  create(blob: Blob): string;
  revoke(url: string): void;
}

const domUrlFactory: UrlFactory = {
  create: (blob) => URL.createObjectURL(blob),
  revoke: (url) => URL.revokeObjectURL(url),
};

export class Viewer {
  private meta: FieldMetadata | null = null;
  private state: ViewerState | null = null;
  private lastPose: PoseRequest | null = null;
  private lastUrl: string | null = null;
  private readonly scheduler: LatestWinsScheduler<PoseRequest, FrameResponse>;

  constructor(
    private readonly client: FrameClient,
    private readonly elements: DisplayElements,
    private readonly urls: UrlFactory = domUrlFactory,
  ) {
    this.scheduler = new LatestWinsScheduler(
      (pose) => this.client.requestFrame(pose),
      (result, pose) => this.showFrame(result, pose),
      (error) => this.showWarning(error),
    );
  }

  /** Fetch metadata, aim the camera at the center and pull a first frame. */
  async connect(): Promise<void> {
    try {
      this.meta = await this.client.fetchMetadata();
    } catch (error) {
      this.elements.banner.textContent =
        `cannot reach frame server: ${error instanceof Error ? error.message : error}`;
      this.elements.banner.hidden = false;
      throw error;
    }
    this.elements.banner.hidden = true;
    this.state = initialState(this.meta);
    this.requestCurrent();
  }

  get connected(): boolean {
    return this.meta !== null;
  }

  get currentState(): ViewerState | null {
    return this.state;
  }

  get metadata(): FieldMetadata | null {
    return this.meta;
  }

  handleInput(input: SteerInput): void {
    if (this.state === null || this.meta === null) {
      return;
    }
    this.state = steer(this.state, input, this.meta);
    this.requestCurrent();
  }

  drag(dx: number, dy: number): void {
    this.handleInput({ kind: 'drag', dx, dy });
  }

  dolly(wheelSteps: number): void {
    this.handleInput({ kind: 'dolly', wheel: wheelSteps });
  }

  setMode(mode: RenderMode): void {
    this.handleInput({ kind: 'mode', mode });
  }

  toggleMode(): void {
    if (this.state !== null) {
      this.setMode(this.state.mode === 'filtered' ? 'nearest' : 'filtered');
    }
  }

  setPreset(preset: ResolutionPreset): void {
    this.handleInput({ kind: 'preset', preset });
  }

  /**
   * The exact JSON of the most recently displayed frame's pose. Saving it
   * and running `fiblight render --pose-json pose.json` reproduces the
   * displayed PNG byte for byte.
   */
  exportPose(): string | null {
    return this.lastPose === null ? null : JSON.stringify(this.lastPose, null, 2);
  }

  private requestCurrent(): void {
    if (this.state === null || this.meta === null) {
      return;
    }
    this.scheduler.submit(poseFromState(this.state, this.meta));
  }

  private showFrame(result: FrameResponse, pose: PoseRequest): void {
    const url = this.urls.create(result.png);
    if (this.lastUrl !== null) {
      this.urls.revoke(this.lastUrl);
    }
    this.lastUrl = url;
    this.elements.image.src = url;
    this.lastPose = pose;
    if (this.state !== null) {
      this.state = {
        ...this.state,
        lastLatencyMicros: result.latencyMicros,
        lastCoveragePercent: result.coveragePercent,
      };
    }
    this.elements.banner.hidden = true;
    this.elements.hud.textContent =
      `${(result.latencyMicros / 1000).toFixed(1)} ms | ` +
      `coverage ${result.coveragePercent.toFixed(1)}% | ` +
      `${pose.mode} | ${pose.width}x${pose.height}`;
  }

  private showWarning(error: unknown): void {
    this.elements.hud.textContent =
      `frame request failed: ${error instanceof Error ? error.message : error}`;
  }
}
