"""Small end-to-end run: transform a toy series, then compare a few forecasters."""

from dvs_forecast.compare import compare_methods
from dvs_forecast.config import load_config
from dvs_forecast.metrics import format_table
from dvs_forecast.series import SynthSpec, synth_series
from dvs_forecast.visibility import dvs_transform, visibility_adjacency


def main():
    values = [8, 4, 5, 7, 2, 9]
    print("edges:", visibility_adjacency(values).edges())
    print("zip:  ", dvs_transform(values).z.round(4).tolist())

    series = synth_series(SynthSpec(length=120, seed=7))
    config = load_config('{"data": {"window_len": 20}, "train": {"iterations": 20}}')
    results, test_set = compare_methods(series, config, ["dvs-cnn", "cnn", "sma", "linear", "vg-walk"], [7])
    print(f"\n{len(test_set)} test windows")
    print(format_table([(r.method, r.report) for r in results]))


if __name__ == "__main__":
    main()
