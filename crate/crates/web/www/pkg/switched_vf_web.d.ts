/* tslint:disable */
/* eslint-disable */

/**
 * Desired course of the distance-only field on an `nx` x `ny` grid over the
 * box `[x0, x1] x [y0, y1]`. Each cell is `[x, y, course, d]`.
 */
export function field_grid(config: string, x0: number, y0: number, x1: number, y1: number, nx: number, ny: number): string;

/**
 * TOML text of a preset: `"reference"` (the four-law comparison start) or
 * `"case1"` (start pointing away from the path).
 */
export function preset_config(name: string): string;

/**
 * Runs one law (`switched`, `basic_vf`, `plos`, `nlgl`) and returns every
 * `stride`-th sample, the metrics and a polyline of the path.
 */
export function simulate(config: string, law: string, stride: number): string;

/**
 * Curvature feasibility of the configured gains.
 */
export function validate(config: string): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly field_grid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly preset_config: (a: number, b: number) => [number, number];
    readonly simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number];
    readonly validate: (a: number, b: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
