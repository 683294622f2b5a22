from .cw_structs   import (dotdict, ComponentProfile, GraphInstance, ConfigurationInstance, BipartiteInstance,
                           QuantumInstance, ParameterError, SizeError, ValidationError, FitError, to_json)
from .cw_defaults  import cw_defaults
from .cw_symb      import compile_symb_func
from .cw_rand      import (RngStream, CutGammaParams, derive_stream, sample_uniform, sample_exponential,
                           sample_binomial, sample_cut_gamma, cut_gamma_mean, cut_gamma_cdf, sample_poisson_process)
from .cw_er        import ErParams, edge_prob, upper_tail_reference
from .cw_regular   import (RegParams, percolation_prob, simple_probability_limit, pair_full, percolate, is_simple,
                           explore_on_instance, explore_conditioned, relcomp_violations)
from .cw_intersection import IntersectionParams, analytic_mean_offspring
from .cw_quantum   import (QuantumParams, CriticalPoint, Arc, ArcLedger, critical_residual, solve_critical_lambda,
                           solvability_threshold, reduced_explore, full_explore, materialize_quantum)
from .cw_walk      import (IncrementLaw, PoissonMinusOne, BinomialMinusOne, RegularStep, CutWalk, Rademacher,
                           make_law, Estimate, stay_positive_estimate, ballot_estimate, chernoff_bound,
                           chernoff_exceedance, excursion_lengths)
from .cw_harness   import (ModelSpec, TrialSummary, TailCurve, ExponentFit, run, lower_tail, upper_tail,
                           fit_stretch_exponent, merge_curves)
from .cw_oracle    import union_find_components, enumerate_er_cmax, exact_tail, replay_suite
from .cw_viz       import plot_tail_fit, write_plot_script
from .utils        import wilson_interval, two_sample_chi2
