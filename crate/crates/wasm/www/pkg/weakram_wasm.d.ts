/* tslint:disable */
/* eslint-disable */

/**
 * First coefficients of the Dwork series and their valuations.
 */
export function dwork_profile(p: number, terms: number): string;

/**
 * Norm-resolvent exponent and modified Gauss sum for one `(eps, j)`.
 */
export function gauss_sum(p: number, d: number, eps: number, j: number): string;

/**
 * Full check suite for `(p, d)`; `eps = 0` selects every class.
 */
export function verify(p: number, d: number, eps: number, precision: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly dwork_profile: (a: number, b: number) => [number, number];
    readonly gauss_sum: (a: number, b: number, c: number, d: number) => [number, number];
    readonly verify: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
