# Adaptive regret toolkit for smooth online convex optimization
