/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_attentiondemo_free: (a: number, b: number) => void;
export const __wbg_envelopedemo_free: (a: number, b: number) => void;
export const __wbg_lambdasweep_free: (a: number, b: number) => void;
export const attention_demo: (a: number, b: number, c: bigint) => [number, number, number];
export const attentiondemo_accuracy: (a: number) => number;
export const attentiondemo_correct: (a: number) => [number, number];
export const attentiondemo_lambda: (a: number) => number;
export const attentiondemo_r_values: (a: number) => [number, number];
export const envelope_demo: (a: number, b: number, c: number, d: number) => [number, number, number];
export const envelopedemo_correlation: (a: number) => number;
export const envelopedemo_envelope: (a: number) => [number, number];
export const envelopedemo_reference: (a: number) => [number, number];
export const lambda_sweep: (a: number, b: bigint) => [number, number, number];
export const lambdasweep_grid: (a: number) => [number, number];
export const lambdasweep_mean_r: (a: number) => [number, number];
export const lambdasweep_selected: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
