import { describe, expect, it } from 'vitest';

import {
  FieldMetadata,
  DRAG_SENSITIVITY,
  MAX_ELEVATION,
  RESOLUTION_PRESETS,
  clampState,
  initialState,
  poseFromState,
  steer,
} from '../src/state';

const meta: FieldMetadata = {
  m: 1024,
  n: 2048,
  radius: 1,
  center: [0, 0, 0],
  hemisphere: false,
  texel_format: 'rgba8',
  suggested_orbit_radius: 2.5,
};

const hemiMeta: FieldMetadata = { ...meta, hemisphere: true };

describe('initialState', () => {
  it('starts at the suggested orbit radius', () => {
    expect(initialState(meta).distance).toBe(2.5);
  });

  it('starts in filtered mode', () => {
    expect(initialState(meta).mode).toBe('filtered');
  });
});

describe('clampState', () => {
  it('limits elevation to +-89 degrees', () => {
    const high = clampState({ ...initialState(meta), elevation: 2 }, meta);
    expect(high.elevation).toBeCloseTo((89 * Math.PI) / 180, 12);
    const low = clampState({ ...initialState(meta), elevation: -2 }, meta);
    expect(low.elevation).toBeCloseTo((-89 * Math.PI) / 180, 12);
  });

  it('restricts hemisphere fields to the upper half', () => {
    const low = clampState({ ...initialState(hemiMeta), elevation: -0.5 }, hemiMeta);
    expect(low.elevation).toBe(0);
    const high = clampState({ ...initialState(hemiMeta), elevation: 1.2 }, hemiMeta);
    expect(high.elevation).toBeCloseTo(1.2, 12);
  });

  it('keeps the camera at least 1.05 x radius from the center', () => {
    const near = clampState({ ...initialState(meta), distance: 0.2 }, meta);
    expect(near.distance).toBeCloseTo(1.05, 12);
    const bigField = { ...meta, radius: 2 };
    const nearBig = clampState({ ...initialState(bigField), distance: 0.2 }, bigField);
    expect(nearBig.distance).toBeCloseTo(2.1, 12);
  });

  it('wraps azimuth into [0, 2pi)', () => {
    const wrapped = clampState({ ...initialState(meta), azimuth: -1 }, meta);
    expect(wrapped.azimuth).toBeCloseTo(2 * Math.PI - 1, 12);
    expect(wrapped.azimuth).toBeGreaterThanOrEqual(0);
  });
});

describe('steer', () => {
  it('drag right increases azimuth by dx * sensitivity, look_at fixed', () => {
    const before = initialState(meta);
    const after = steer(before, { kind: 'drag', dx: 30, dy: 0 }, meta);
    expect(after.azimuth).toBeCloseTo(before.azimuth + 30 * DRAG_SENSITIVITY, 12);
    expect(poseFromState(after, meta).look_at).toEqual([0, 0, 0]);
  });

  it('dolly multiplies distance and respects the minimum', () => {
    const before = initialState(meta);
    const out = steer(before, { kind: 'dolly', wheel: 2 }, meta);
    expect(out.distance).toBeCloseTo(before.distance * 1.1 * 1.1, 12);
    const inward = steer(before, { kind: 'dolly', wheel: -100 }, meta);
    expect(inward.distance).toBeCloseTo(1.05, 12);
  });

  it('mode and preset switches leave the orbit untouched', () => {
    const before = initialState(meta);
    const toggled = steer(before, { kind: 'mode', mode: 'nearest' }, meta);
    expect(toggled.mode).toBe('nearest');
    expect(toggled.azimuth).toBe(before.azimuth);
    const resized = steer(before, { kind: 'preset', preset: RESOLUTION_PRESETS[2] }, meta);
    expect(resized.preset.width).toBe(512);
  });

  it('does not mutate the input state', () => {
    const before = initialState(meta);
    const frozen = JSON.stringify(before);
    steer(before, { kind: 'drag', dx: 10, dy: -5 }, meta);
    expect(JSON.stringify(before)).toBe(frozen);
  });
});

describe('poseFromState', () => {
  it('places the eye on the orbit sphere with world up +z', () => {
    const state = { ...initialState(meta), azimuth: 0.5, elevation: 0.35, distance: 2.5 };
    const pose = poseFromState(state, meta);
    expect(pose.eye[0]).toBeCloseTo(2.5 * Math.cos(0.35) * Math.cos(0.5), 14);
    expect(pose.eye[1]).toBeCloseTo(2.5 * Math.cos(0.35) * Math.sin(0.5), 14);
    expect(pose.eye[2]).toBeCloseTo(2.5 * Math.sin(0.35), 14);
    expect(pose.up).toEqual([0, 0, 1]);
    expect(Math.hypot(...pose.eye)).toBeCloseTo(2.5, 12);
  });

  it('honors a non-origin field center', () => {
    const shifted = { ...meta, center: [1, 2, 3] as [number, number, number] };
    const pose = poseFromState({ ...initialState(shifted), elevation: 0 }, shifted);
    expect(pose.look_at).toEqual([1, 2, 3]);
    expect(pose.eye[2]).toBeCloseTo(3, 12);
  });

  it('survives JSON round-trips without loss', () => {
    // The CLI replays the serialized pose; doubles must round-trip exactly.
    const state = { ...initialState(meta), azimuth: 1.234567891234, elevation: 0.87654321 };
    const pose = poseFromState(state, meta);
    expect(JSON.parse(JSON.stringify(pose))).toEqual(pose);
  });
});
