/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const interval_intersection: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const polynomial_zonotope: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number];
export const reach_projection: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;
