# Experiment Runner Module
