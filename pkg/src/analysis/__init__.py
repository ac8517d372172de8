# Comparator and Regret Audit Module
