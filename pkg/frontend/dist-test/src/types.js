/** Shared types mirroring the service's JSON API. */
export const N_POINTS = 68;
/** Semantic groups of the 68-point convention (for marker coloring). */
export const GROUPS = [
    ["jaw", 0, 17],
    ["brows", 17, 27],
    ["nose", 27, 36],
    ["eyes", 36, 48],
    ["mouth", 48, 68],
];
