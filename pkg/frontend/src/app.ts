import { HttpGatewayApi } from "./api.js";
import { ChatConsole } from "./console.js";

const stage = document.getElementById("stage");
if (!stage) {
  throw new Error("missing #stage element");
}
void new ChatConsole(stage, new HttpGatewayApi()).boot();
