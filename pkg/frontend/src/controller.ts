import { ApiClient, ApiError } from "./api.js";
import {
  buildRequest,
  canRun,
  initialState,
  reduce,
  type Action,
  type UiState,
} from "./state.js";

// Drives the state machine against the service. State updates are
// serialized through dispatch; the browser shell and the tests share this.
export class Controller {
  state: UiState;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (state: UiState) => void = () => {},
  ) {
    this.state = initialState();
  }

  dispatch(action: Action): void {
    this.state = reduce(this.state, action);
    this.onChange(this.state);
  }

  async loadCatalog(): Promise<void> {
    const [networks, queries] = await Promise.all([
      this.api.listNetworks(),
      this.api.listQueries(),
    ]);
    this.dispatch({ type: "catalogLoaded", networks, queries });
  }

  // Starts an execution and renders its event stream incrementally.
  // Returns the execution id, or null when the request was rejected.
  async run(): Promise<string | null> {
    if (!canRun(this.state)) {
      return null;
    }
    const request = buildRequest(this.state);
    let id: string;
    try {
      id = await this.api.startExecution(request);
    } catch (err) {
      if (err instanceof ApiError) {
        this.dispatch({
          type: "runRejected",
          message: err.body.error,
          position: err.body.position,
        });
        return null;
      }
      throw err;
    }
    this.dispatch({ type: "runStarted", id });
    await this.follow(id);
    return id;
  }

  // Re-subscribes to a buffered stream; the replay converges on the same
  // final state as the original subscription.
  async reconnect(id: string): Promise<void> {
    this.dispatch({ type: "runStarted", id });
    await this.follow(id);
  }

  private async follow(id: string): Promise<void> {
    for await (const event of this.api.streamEvents(id)) {
      this.dispatch({ type: "serverEvent", event });
    }
  }
}
