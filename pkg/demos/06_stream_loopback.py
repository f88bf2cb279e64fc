# %% [markdown]
# # Remote acquisition over TCP
#
# A stored trace is replayed by a stream server and recorded by a client,
# the way a remote receiver would hand samples to an analysis machine.

# %%
import tempfile
import threading
from pathlib import Path

from ionleak.emitsim import EmissionConfig, synthesize, x_sweep_circuit
from ionleak.ionet import StreamServer, capture_stream, write_trace
from ionleak.reconstruct import analyze_trace

work = Path(tempfile.mkdtemp())
trace, _ = synthesize(x_sweep_circuit(), EmissionConfig(), seed=0)
write_trace(trace, work / "shot.rftrace", description="x sweep")

with StreamServer(work / "shot.rftrace") as server:
    threading.Thread(target=server.serve, daemon=True).start()
    captured = capture_stream("127.0.0.1", server.port, out_path=work / "captured.rftrace")

same = (work / "shot.rftrace").read_bytes() == (work / "captured.rftrace").read_bytes()
print(f"captured {captured.payload.size} samples, byte-identical: {same}")

# %% The capture analyses like the original.
an = analyze_trace(captured.to_trace())
print(f"{len(an.events[0])} gate events in the first shot")
