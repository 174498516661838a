/* tslint:disable */
/* eslint-disable */

/**
 * Largest violation of the perfect-correlation inequality found.
 */
export function bell_search(d: number, phi: number, variant: string, restarts: number, seed: bigint): string;

/**
 * Maximum CHSH value over `points` equally spaced Φ in `[-1, 1]`.
 */
export function chsh_curve(d: number, points: number, restarts: number, seed: bigint): string;

/**
 * Certificate for the Werner source-operator at `(d, Φ)`.
 */
export function dilation_report(d: number, phi: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bell_search: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly chsh_curve: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly dilation_report: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
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
