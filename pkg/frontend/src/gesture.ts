// Drag gesture → force command. The mapping is linear (newtons per
// pixel) and deliberately unclamped: the server clamps, and the UI
// annotates when the echoed force differs from the request.

import { Pair, releaseCommand, setForceCommand } from "./wire.js";

export interface DragState {
  active: boolean;
  startPx: Pair;
  currentPx: Pair;
}

export function startDrag(xPx: number, yPx: number): DragState {
  return { active: true, startPx: [xPx, yPx], currentPx: [xPx, yPx] };
}

export function moveDrag(drag: DragState, xPx: number, yPx: number): DragState {
  return { ...drag, currentPx: [xPx, yPx] };
}

/** Pixel displacement → force in newtons. Canvas y grows downward while
 *  the world y grows upward, so the y subtraction runs start − current
 *  (which also avoids a -0 component on purely horizontal drags). */
export function dragToForce(drag: DragState, scaleNPerPx: number): Pair {
  return [
    (drag.currentPx[0] - drag.startPx[0]) * scaleNPerPx,
    (drag.startPx[1] - drag.currentPx[1]) * scaleNPerPx,
  ];
}

export function dragCommand(drag: DragState, scaleNPerPx: number): string {
  const [fx, fy] = dragToForce(drag, scaleNPerPx);
  return setForceCommand(fx, fy);
}

export function endDragCommand(): string {
  return releaseCommand();
}
