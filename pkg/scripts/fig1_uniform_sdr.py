"""SDR of analog PPM for a uniform source, against the separation baseline."""

from _figure_common import parse_args, sdr_sweep

from ppm_jscc.experiment import Scheme

if __name__ == "__main__":
    args = parse_args(__doc__, [8.0, 10.0, 12.0, 14.0, 16.0, 18.0])
    print(sdr_sweep(Scheme.ANALOG_UNIFORM, Scheme.SEPARATION_UNIFORM, args, "fig1_uniform"))
