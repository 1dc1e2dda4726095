"""Regenerates core/src/df_table.inc: asymptotic Dickey-Fuller p-values for
the constant-only regression, tabulated over the t-statistic.

Usage: python3 tools/scripts/gen_df_table.py > core/src/df_table.inc
"""
import numpy as np
from statsmodels.tsa.adfvalues import mackinnonp

taus = np.round(np.arange(-7.0, 3.0001, 0.05), 2)
print("// Generated by tools/scripts/gen_df_table.py (statsmodels mackinnonp, regression 'c').")
print("// {t-statistic, p-value}, increasing in both columns.")
for t in taus:
    print(f"{{{t:.2f}, {mackinnonp(t, regression='c', N=1):.10g}}},")
