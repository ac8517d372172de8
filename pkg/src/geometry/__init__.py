# Feasible Sets, Losses and Scenarios
