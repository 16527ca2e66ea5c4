"""Linear-time empirical partial dependence for tree ensembles.

Thin re-export of the compiled module; see the functions on `fastpd._fastpd`
for the full surface.
"""

from ._fastpd import (
    BudgetError,
    Dataset,
    Decomposition,
    EnsembleAugmentation,
    ShapMatrix,
    TreeEnsemble,
    ValidationError,
    __version__,
    augment_ensemble,
    decompose,
    decompose_path,
    decompose_vanilla,
    generate_dgp,
    importance,
    load_augmentation_file,
    load_csv_file,
    parse_model,
    parse_model_file,
    path_dependent_shap,
    pd_plot,
    pd_values,
    save_augmentation_file,
    save_csv_file,
    shap_direct,
    shap_from_decomposition,
    vanilla_pd,
    vanilla_shap,
)

__all__ = [
    "BudgetError",
    "Dataset",
    "Decomposition",
    "EnsembleAugmentation",
    "ShapMatrix",
    "TreeEnsemble",
    "ValidationError",
    "__version__",
    "augment_ensemble",
    "decompose",
    "decompose_path",
    "decompose_vanilla",
    "generate_dgp",
    "importance",
    "load_augmentation_file",
    "load_csv_file",
    "parse_model",
    "parse_model_file",
    "path_dependent_shap",
    "pd_plot",
    "pd_values",
    "save_augmentation_file",
    "save_csv_file",
    "shap_direct",
    "shap_from_decomposition",
    "vanilla_pd",
    "vanilla_shap",
]
