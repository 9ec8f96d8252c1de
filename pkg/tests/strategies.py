from hypothesis import strategies as st

probabilities = st.fractions(min_value=0, max_value=1, max_denominator=60)
bits = st.integers(min_value=0, max_value=1)
