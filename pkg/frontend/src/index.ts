export * from "./api.js";
export * from "./state.js";
export * from "./colormap.js";
export * from "./dendrogram.js";
export * from "./heatmap.js";
export * from "./grid.js";
export * from "./superquadric.js";
export * from "./groupview.js";
export * from "./scratchpad.js";
export * from "./render.js";
