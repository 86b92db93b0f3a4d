"""Process planning for aluminum extrusion dies.

The package turns a profile specification into a machining process plan:
profiles and designs are encoded as segmented binary vectors, a small
feedforward network retrieves the design skeleton for a profile, a rule
base classifies die types and assigns machining operations to features,
and a removal-rate estimator prices the resulting plan. A case library
of encoded profile/design pairs backs both network training and
nearest-neighbor fallback.
"""

__version__ = "0.1.0"
