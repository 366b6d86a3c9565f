# Monte Carlo runners and design sweeps
