/**
 * Orbit-camera state for the light-field viewer.
 *
 * The camera always orbits the field center: azimuth/elevation/distance are
 * the only degrees of freedom, matching the outside-in regime the baked
 * sphere supports. Pose serialization is plain JSON and is replayable
 * byte-for-byte through the `fiblight render --pose-json` CLI.
 */

export interface FieldMetadata {
  m: number;
  n: number;
  radius: number;
  center: [number, number, number];
  hemisphere: boolean;
  texel_format: string;
  suggested_orbit_radius: number;
}

export type RenderMode = 'nearest' | 'filtered';

export interface ResolutionPreset {
  label: string;
  width: number;
  height: number;
}

export const RESOLUTION_PRESETS: ResolutionPreset[] = [
  { label: '256', width: 256, height: 256 },
  { label: '384', width: 384, height: 384 },
  { label: '512', width: 512, height: 512 },
];

export interface ViewerState {
  azimuth: number; // radians
  elevation: number; // radians
  distance: number; // world units
  fovDeg: number;
  mode: RenderMode;
  preset: ResolutionPreset;
  lastLatencyMicros: number | null;
  lastCoveragePercent: number | null;
}

export interface PoseRequest {
  eye: [number, number, number];
  look_at: [number, number, number];
  up: [number, number, number];
  fov_deg: number;
  width: number;
  height: number;
  mode: RenderMode;
}

/** Hard elevation clamp: stay off the poles to avoid gimbal flip. */
export const MAX_ELEVATION = (89 * Math.PI) / 180;

/** The camera must stay outside the bake sphere with a small margin. */
export const MIN_DISTANCE_FACTOR = 1.05;

export function initialState(meta: FieldMetadata): ViewerState {
  return clampState(
    {
      azimuth: 0.5,
      elevation: 0.4,
      distance: meta.suggested_orbit_radius,
      fovDeg: 45,
      mode: 'filtered',
      preset: RESOLUTION_PRESETS[0],
      lastLatencyMicros: null,
      lastCoveragePercent: null,
    },
    meta,
  );
}

/**
 * Enforce the state invariants against the loaded field: |elevation| <= 89
 * degrees (lower bound 0 for hemisphere fields, which only cover z > 0),
 * distance >= 1.05 x field radius, azimuth wrapped to [0, 2pi).
 */
export function clampState(state: ViewerState, meta: FieldMetadata): ViewerState {
  const minElevation = meta.hemisphere ? 0 : -MAX_ELEVATION;
  const tau = 2 * Math.PI;
  return {
    ...state,
    azimuth: ((state.azimuth % tau) + tau) % tau,
    elevation: Math.min(MAX_ELEVATION, Math.max(minElevation, state.elevation)),
    distance: Math.max(MIN_DISTANCE_FACTOR * meta.radius, state.distance),
  };
}

/**
 * Spherical orbit to camera pose, world up +z:
 * eye = center + d * (cos(el) cos(az), cos(el) sin(az), sin(el)).
 */
export function poseFromState(state: ViewerState, meta: FieldMetadata): PoseRequest {
  const [cx, cy, cz] = meta.center;
  const ce = Math.cos(state.elevation);
  return {
    eye: [
      cx + state.distance * ce * Math.cos(state.azimuth),
      cy + state.distance * ce * Math.sin(state.azimuth),
      cz + state.distance * Math.sin(state.elevation),
    ],
    look_at: [cx, cy, cz],
    up: [0, 0, 1],
    fov_deg: state.fovDeg,
    width: state.preset.width,
    height: state.preset.height,
    mode: state.mode,
  };
}

export interface SteerInput {
  kind: 'drag' | 'dolly' | 'mode' | 'preset';
  dx?: number; // pixels, drag
  dy?: number; // pixels, drag
  wheel?: number; // dolly steps, positive = away
  mode?: RenderMode;
  preset?: ResolutionPreset;
}

export const DRAG_SENSITIVITY = 0.01; // radians per pixel
export const DOLLY_FACTOR = 1.1; // distance multiplier per wheel step

/** Apply one input event; returns a new clamped state (input is pure). */
export function steer(state: ViewerState, input: SteerInput, meta: FieldMetadata): ViewerState {
  const next = { ...state };
  switch (input.kind) {
    case 'drag':
      next.azimuth += (input.dx ?? 0) * DRAG_SENSITIVITY;
      next.elevation += (input.dy ?? 0) * DRAG_SENSITIVITY;
      break;
    case 'dolly':
      next.distance *= Math.pow(DOLLY_FACTOR, input.wheel ?? 0);
      break;
    case 'mode':
      next.mode = input.mode ?? next.mode;
      break;
    case 'preset':
      next.preset = input.preset ?? next.preset;
      break;
  }
  return clampState(next, meta);
}
