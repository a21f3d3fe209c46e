import pandas as pd

# mlops: train-model dataset=data/toy.csv target=churn model=logreg seed=7
def train_churn_model(frame: pd.DataFrame):
    ...

# mlops: evaluate-model dataset=data/toy.csv target=churn
def score_churn_model(frame: pd.DataFrame):
    ...
