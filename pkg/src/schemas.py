from pandera import Check, Column, DataFrameSchema

increasing = Check(lambda column: column.is_monotonic_increasing, error="values must be increasing")

sublevel_schema = DataFrameSchema(
    {
        "s": Column(float, [Check.greater_than(0.0), increasing], nullable=False),
        "measure": Column(
            float,
            [
                Check.greater_than_or_equal_to(0.0),
                Check(lambda column: column.is_monotonic_increasing, error="measure must be nondecreasing"),
            ],
            nullable=False,
        ),
        "stderr": Column(float, Check.greater_than_or_equal_to(0.0), nullable=False),
    },
    strict="filter",
)

ladder_schema = DataFrameSchema(
    {
        "lambda": Column(float, Check.greater_than_or_equal_to(2.0), nullable=False),
        "b": Column(str, nullable=False),
        "re": Column(float, nullable=False),
        "im": Column(float, nullable=False),
        "abs": Column(float, Check.greater_than_or_equal_to(0.0), nullable=False),
        "err": Column(float, Check.greater_than_or_equal_to(0.0), nullable=False),
        "converged": Column(bool, nullable=False),
        "nodes": Column(int, Check.greater_than(0), nullable=False),
    },
    strict="filter",
)

d1_schema = DataFrameSchema(
    {
        "lambda": Column(float, Check.greater_than_or_equal_to(2.0), nullable=False),
        "region": Column(int, Check.greater_than_or_equal_to(1), nullable=False),
        "measure": Column(float, Check.greater_than_or_equal_to(0.0), nullable=False),
        "stderr": Column(float, Check.greater_than_or_equal_to(0.0), nullable=False),
    },
    strict="filter",
)
