"""News-sentiment features for LSTM stock price forecasting."""

__version__ = "0.1.0"
