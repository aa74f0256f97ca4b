/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const dwork_profile: (a: number, b: number) => [number, number];
export const gauss_sum: (a: number, b: number, c: number, d: number) => [number, number];
export const verify: (a: number, b: number, c: number, d: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
